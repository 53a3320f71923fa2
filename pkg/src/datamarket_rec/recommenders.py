"""Most-popular and neighborhood collaborative-filtering recommenders.

Both algorithms work on the four recommendation directions of a data market
(:class:`UseCase`). UC1/UC2 read raw ``user -> X`` edges, UC3/UC4 read the
derived ``dataset -> service`` links.
"""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Collection
from dataclasses import dataclass, replace
from enum import Enum

from .model import EntityKind, EntityRef, InteractionStore, project_dataset_service

__all__ = [
    "Algorithm",
    "Similarity",
    "UseCase",
    "RecommendationProfile",
    "RankedList",
    "relevant_store",
    "candidate_popularity",
    "similarity",
    "recommend_mp",
    "recommend_cf",
    "recommend",
]


class Algorithm(str, Enum):
    MP = "mp"
    CF = "cf"

    def __str__(self) -> str:
        return self.value


class Similarity(str, Enum):
    COSINE = "cosine"
    JACCARD = "jaccard"

    def __str__(self) -> str:
        return self.value


class UseCase(Enum):
    """Recommendation direction: who receives lists, and of what."""

    UC1 = ("uc1", EntityKind.USER, EntityKind.DATASET, False)
    UC2 = ("uc2", EntityKind.USER, EntityKind.SERVICE, False)
    UC3 = ("uc3", EntityKind.SERVICE, EntityKind.DATASET, True)
    UC4 = ("uc4", EntityKind.DATASET, EntityKind.SERVICE, True)

    def __init__(self, token, target_kind, candidate_kind, projected):
        self.token = token
        self.target_kind = target_kind
        self.candidate_kind = candidate_kind
        self.projected = projected

    def __str__(self) -> str:
        return self.token

    @classmethod
    def parse(cls, token: str) -> UseCase:
        for uc in cls:
            if uc.token == token.strip().lower():
                return uc
        raise ValueError(f"unknown use case {token!r} (expected uc1..uc4)")


@dataclass(frozen=True)
class RecommendationProfile:
    """Parameter bundle for one algorithm.

    ``filter_seen`` defaults to True for CF and False for MP.
    """

    algorithm: Algorithm
    k: int = 10
    neighborhood_size: int = 20
    similarity: Similarity = Similarity.COSINE
    filter_seen: bool | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        object.__setattr__(self, "similarity", Similarity(self.similarity))
        for name in ("k", "neighborhood_size"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.filter_seen is None:
            object.__setattr__(self, "filter_seen", self.algorithm is Algorithm.CF)
        elif not isinstance(self.filter_seen, bool):
            raise ValueError(f"filter_seen must be a boolean, got {self.filter_seen!r}")

    def updated(self, **changes) -> RecommendationProfile:
        unknown = set(changes) - {"k", "neighborhood_size", "similarity", "filter_seen"}
        if unknown:
            raise ValueError(f"unknown profile fields: {', '.join(sorted(unknown))}")
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm.value,
            "k": self.k,
            "neighborhood_size": self.neighborhood_size,
            "similarity": self.similarity.value,
            "filter_seen": self.filter_seen,
        }


@dataclass(frozen=True)
class RankedList:
    entries: tuple[tuple[EntityRef, float], ...] = ()
    fallback: bool = False

    @property
    def ids(self) -> list[EntityRef]:
        return [e for e, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def relevant_store(store: InteractionStore, use_case: UseCase) -> InteractionStore:
    """Store whose edges ``use_case`` reads.

    For UC3/UC4 a store that already holds ``dataset -> service`` links is
    used as is; otherwise the links are derived from the user interactions.
    """
    if use_case.projected and not store.has_kind_pair(
        EntityKind.DATASET, EntityKind.SERVICE
    ):
        return project_dataset_service(store)
    return store


def candidate_popularity(
    store: InteractionStore, use_case: UseCase, candidate: EntityRef
) -> int:
    """Interactions between ``candidate`` and entities of the target kind."""
    return store.degree(candidate, use_case.target_kind)


def _sim(overlap: int, size_a: int, size_b: int, measure: Similarity) -> float:
    if overlap == 0 or size_a == 0 or size_b == 0:
        return 0.0
    if measure is Similarity.COSINE:
        return overlap / math.sqrt(size_a * size_b)
    return overlap / (size_a + size_b - overlap)


def similarity(
    a: Collection[EntityRef],
    b: Collection[EntityRef],
    measure: Similarity = Similarity.COSINE,
) -> float:
    """Cosine or Jaccard similarity of two binary interaction profiles."""
    a, b = set(a), set(b)
    return _sim(len(a & b), len(a), len(b), Similarity(measure))


def _rank(scores: dict[EntityRef, float], store, use_case, k) -> list[tuple[EntityRef, float]]:
    keyed = sorted(
        scores.items(),
        key=lambda item: (
            -item[1],
            -candidate_popularity(store, use_case, item[0]),
            item[0].id,
        ),
    )
    return keyed[:k] if k is not None else keyed


def _mp_ranking(store: InteractionStore, use_case: UseCase) -> list[tuple[EntityRef, float]]:
    scores = {}
    for c in store.entities(use_case.candidate_kind):
        pop = candidate_popularity(store, use_case, c)
        if pop > 0:
            scores[c] = float(pop)
    return sorted(scores.items(), key=lambda item: (-item[1], item[0].id))


def recommend_mp(
    store: InteractionStore, use_case: UseCase, profile: RecommendationProfile
) -> RankedList:
    """Candidates ranked by interaction count; identical for every target."""
    store = relevant_store(store, use_case)
    return RankedList(tuple(_mp_ranking(store, use_case)[: profile.k]))


def _filtered_mp(store, use_case, target, profile) -> RankedList:
    seen = store.linked(target, use_case.candidate_kind)
    ranking = [(c, s) for c, s in _mp_ranking(store, use_case) if c not in seen]
    return RankedList(tuple(ranking[: profile.k]))


def cf_scores(
    store: InteractionStore,
    use_case: UseCase,
    target: EntityRef,
    profile: RecommendationProfile,
) -> dict[EntityRef, float]:
    """Unfiltered neighborhood scores for every candidate reachable from ``target``.

    ``store`` must already be the relevant store for ``use_case``.
    """
    tk, ck = use_case.target_kind, use_case.candidate_kind
    profile_items = store.linked(target, ck)
    n_items = len(profile_items)
    overlap: dict[EntityRef, int] = defaultdict(int)
    for c in profile_items:
        for other in store.linked(c, tk):
            if other != target:
                overlap[other] += 1

    neighbors = []
    for other, shared in overlap.items():
        sim = _sim(shared, n_items, len(store.linked(other, ck)), profile.similarity)
        if sim > 0:
            neighbors.append((other, sim))
    neighbors.sort(key=lambda item: (-item[1], item[0].id))
    del neighbors[profile.neighborhood_size :]

    scores: dict[EntityRef, float] = defaultdict(float)
    for other, sim in neighbors:
        for c in store.linked(other, ck):
            scores[c] += sim
    return dict(scores)


def recommend_cf(
    store: InteractionStore,
    use_case: UseCase,
    target: EntityRef,
    profile: RecommendationProfile,
) -> RankedList:
    """User-based (or entity-based, for UC3/UC4) neighborhood CF.

    Similarities are computed between ``target`` and other entities of the
    target kind over binary candidate profiles. A candidate scores the sum of
    similarities of the neighbors that interacted with it. Targets without
    any interaction get the MP list with ``fallback=True``.
    """
    if target.kind is not use_case.target_kind:
        raise ValueError(
            f"{use_case} expects a {use_case.target_kind.value} target, got {target}"
        )
    store = relevant_store(store, use_case)
    seen = store.linked(target, use_case.candidate_kind)
    if not seen:
        mp = recommend_mp(store, use_case, profile)
        return RankedList(mp.entries, fallback=True)
    scores = cf_scores(store, use_case, target, profile)
    if profile.filter_seen:
        for c in seen:
            scores.pop(c, None)
    return RankedList(tuple(_rank(scores, store, use_case, profile.k)))


def recommend(
    store: InteractionStore,
    use_case: UseCase,
    target: EntityRef | None,
    profile: RecommendationProfile,
) -> RankedList:
    """Dispatch on ``profile.algorithm``.

    MP honours ``filter_seen`` here when a target is given, which
    :func:`recommend_mp` itself never does.
    """
    if profile.algorithm is Algorithm.MP:
        if profile.filter_seen and target is not None:
            return _filtered_mp(relevant_store(store, use_case), use_case, target, profile)
        return recommend_mp(store, use_case, profile)
    if target is None:
        raise ValueError("CF needs a target entity")
    return recommend_cf(store, use_case, target, profile)
