"""Leave-n-out offline evaluation.

Every target entity with at least ``min_interactions`` distinct candidates
has ``holdout`` of them withheld; recommendations are computed on what is
left and scored against the withheld set.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .metrics import EvaluationCase, MetricReport, aggregate
from .model import EntityRef, Interaction, InteractionStore
from .recommenders import (
    Algorithm,
    RankedList,
    RecommendationProfile,
    UseCase,
    recommend,
    recommend_mp,
    relevant_store,
)

__all__ = [
    "SplitStrategy",
    "SplitConfig",
    "SplitResult",
    "EvaluationReport",
    "split",
    "run_evaluation",
]

log = logging.getLogger(__name__)

_SEED_LIMIT = 2**64


class SplitStrategy(str, Enum):
    MOST_RECENT = "most-recent"
    SEEDED_RANDOM = "seeded-random"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SplitConfig:
    """Holdout settings.

    ``strategy=None`` picks MOST_RECENT when every relevant interaction has a
    timestamp and SEEDED_RANDOM otherwise.
    """

    min_interactions: int = 11
    holdout: int = 10
    strategy: SplitStrategy | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.strategy is not None:
            object.__setattr__(self, "strategy", SplitStrategy(self.strategy))
        if not (self.min_interactions > self.holdout >= 1):
            raise ValueError(
                "need min_interactions > holdout >= 1, got "
                f"min_interactions={self.min_interactions}, holdout={self.holdout}"
            )
        if not 0 <= self.seed < _SEED_LIMIT:
            raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {self.seed}")

    def to_dict(self) -> dict:
        return {
            "min_interactions": self.min_interactions,
            "holdout": self.holdout,
            "strategy": self.strategy.value if self.strategy else None,
            "seed": self.seed,
        }


@dataclass
class SplitResult:
    train_store: InteractionStore
    test_sets: dict[EntityRef, frozenset[EntityRef]]
    withheld: tuple[Interaction, ...] = ()
    strategy: SplitStrategy | None = None

    @property
    def targets(self) -> list[EntityRef]:
        return sorted(self.test_sets, key=lambda e: e.id)


def _resolve_strategy(store, use_case, config) -> SplitStrategy:
    if config.strategy is not None:
        return config.strategy
    tk, ck = use_case.target_kind, use_case.candidate_kind
    relevant = [i for i in store if {i.source.kind, i.target.kind} == {tk, ck}]
    if relevant and all(i.timestamp is not None for i in relevant):
        return SplitStrategy.MOST_RECENT
    return SplitStrategy.SEEDED_RANDOM


def _latest_times(store, targets, candidate_kind) -> dict[tuple[EntityRef, EntityRef], int]:
    latest: dict[tuple[EntityRef, EntityRef], int] = {}
    for i in store:
        if i.source in targets and i.target.kind is candidate_kind:
            key = (i.source, i.target)
        elif i.target in targets and i.source.kind is candidate_kind:
            key = (i.target, i.source)
        else:
            continue
        if i.timestamp is None:
            raise ValueError(
                f"most-recent split needs timestamps; {i.source} -> {i.target} has none"
            )
        if key not in latest or i.timestamp > latest[key]:
            latest[key] = i.timestamp
    return latest


def split(store: InteractionStore, use_case: UseCase, config: SplitConfig) -> SplitResult:
    """Withhold ``config.holdout`` distinct candidates per qualifying target.

    Qualifying targets are counted on distinct candidates, so repeated
    interactions with one candidate count once. All interactions between a
    target and a withheld candidate leave the training store.
    """
    store = relevant_store(store, use_case)
    tk, ck = use_case.target_kind, use_case.candidate_kind
    targets = sorted(
        (t for t in store.entities(tk) if len(store.linked(t, ck)) >= config.min_interactions),
        key=lambda e: e.id,
    )
    if not targets:
        return SplitResult(store, {}, (), config.strategy)

    strategy = _resolve_strategy(store, use_case, config)
    test_sets: dict[EntityRef, frozenset[EntityRef]] = {}
    if strategy is SplitStrategy.MOST_RECENT:
        latest = _latest_times(store, set(targets), ck)
        for t in targets:
            ordered = sorted(store.linked(t, ck), key=lambda c: (-latest[(t, c)], c.id))
            test_sets[t] = frozenset(ordered[: config.holdout])
    else:
        rng = np.random.default_rng(config.seed)
        for t in targets:
            pool = sorted(store.linked(t, ck), key=lambda c: c.id)
            picks = rng.choice(len(pool), size=config.holdout, replace=False)
            test_sets[t] = frozenset(pool[j] for j in sorted(picks))

    train = InteractionStore()
    withheld = []
    for i in store:
        if (i.source in test_sets and i.target in test_sets[i.source]) or (
            i.target in test_sets and i.source in test_sets[i.target]
        ):
            withheld.append(i)
        else:
            train.add(i)
    return SplitResult(train.freeze(), test_sets, tuple(withheld), strategy)


@dataclass
class EvaluationReport:
    """Metrics for one (use case, algorithm) run plus provenance."""

    use_case: UseCase
    profile: RecommendationProfile
    config: SplitConfig
    metrics: MetricReport
    strategy: SplitStrategy | None
    statistics: Mapping[str, int] = field(default_factory=dict)
    n_fallback: int = 0

    @property
    def algorithm(self) -> Algorithm:
        return self.profile.algorithm

    def to_dict(self) -> dict:
        return {
            "use_case": self.use_case.token,
            "algorithm": self.profile.algorithm.value,
            "metrics": self.metrics.to_dict(),
            "profile": self.profile.to_dict(),
            "split": self.config.to_dict(),
            "strategy": self.strategy.value if self.strategy else None,
            "seed": self.config.seed,
            "statistics": dict(self.statistics),
            "n_fallback": self.n_fallback,
        }


def run_evaluation(
    store: InteractionStore,
    use_case: UseCase,
    profile: RecommendationProfile,
    config: SplitConfig = SplitConfig(),
) -> EvaluationReport:
    """Split, recommend for every evaluated target, and aggregate.

    For UC3/UC4 the dataset-service links are derived from the full store
    before splitting.
    """
    from .ingestion import compute_statistics

    full = relevant_store(store, use_case)
    result = split(full, use_case, config)
    train = result.train_store

    constant: RankedList | None = None
    if profile.algorithm is Algorithm.MP and not profile.filter_seen:
        constant = recommend_mp(train, use_case, profile)

    cases = []
    n_fallback = 0
    for t in result.targets:
        ranked = constant if constant is not None else recommend(train, use_case, t, profile)
        n_fallback += ranked.fallback
        cases.append(EvaluationCase(ranked.ids, result.test_sets[t]))

    metrics = aggregate(cases, k=10)
    log.info(
        "%s/%s: %d evaluated targets, %d fallbacks",
        use_case, profile.algorithm, metrics.n_cases, n_fallback,
    )
    return EvaluationReport(
        use_case=use_case,
        profile=profile,
        config=config,
        metrics=metrics,
        strategy=result.strategy,
        statistics=compute_statistics(full).to_dict(),
        n_fallback=n_fallback,
    )
