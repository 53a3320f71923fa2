"""Typed tripartite interaction graph.

Users, datasets and services are the three entity kinds. Raw interactions go
from a user to a dataset or a service; derived links go from a dataset to a
service. :class:`InteractionStore` keeps the interactions in insertion order
together with forward/reverse indices and incoming-interaction counts.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "EntityKind",
    "EntityRef",
    "Interaction",
    "InvalidInteraction",
    "InteractionStore",
    "VALID_KIND_PAIRS",
    "add_interaction",
    "targets_of",
    "project_dataset_service",
]


class EntityKind(str, Enum):
    USER = "user"
    DATASET = "dataset"
    SERVICE = "service"

    def __str__(self) -> str:
        return self.value


VALID_KIND_PAIRS = frozenset(
    {
        (EntityKind.USER, EntityKind.DATASET),
        (EntityKind.USER, EntityKind.SERVICE),
        (EntityKind.DATASET, EntityKind.SERVICE),
    }
)


class InvalidInteraction(ValueError):
    """Raised for interactions that break the tripartite edge rules."""


@dataclass(frozen=True, order=True)
class EntityRef:
    """Identity of one entity: its kind plus an opaque string id."""

    kind: EntityKind
    id: str

    def __post_init__(self) -> None:
        if not isinstance(self.kind, EntityKind):
            object.__setattr__(self, "kind", EntityKind(self.kind))
        if not isinstance(self.id, str) or not self.id:
            raise ValueError(f"entity id must be a non-empty string, got {self.id!r}")
        if any(ch.isspace() for ch in self.id):
            raise ValueError(f"entity id must not contain whitespace: {self.id!r}")

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.id}"


def user(id: str) -> EntityRef:
    return EntityRef(EntityKind.USER, id)


def dataset(id: str) -> EntityRef:
    return EntityRef(EntityKind.DATASET, id)


def service(id: str) -> EntityRef:
    return EntityRef(EntityKind.SERVICE, id)


@dataclass(frozen=True)
class Interaction:
    """One directed edge ``source -> target``.

    Attributes:
        source: Originating entity (a user, or a dataset for derived links).
        target: Receiving entity.
        weight: Positive edge weight, 1 for raw events.
        timestamp: Optional epoch seconds.
    """

    source: EntityRef
    target: EntityRef
    weight: float = 1
    timestamp: int | None = None

    def __post_init__(self) -> None:
        pair = (self.source.kind, self.target.kind)
        if pair not in VALID_KIND_PAIRS:
            raise InvalidInteraction(
                f"invalid kind pair ({pair[0].value}, {pair[1].value})"
            )
        if isinstance(self.weight, bool) or not isinstance(self.weight, (int, float)):
            raise InvalidInteraction(f"weight must be a number, got {self.weight!r}")
        if not math.isfinite(self.weight) or self.weight <= 0:
            raise InvalidInteraction(f"weight must be positive, got {self.weight!r}")
        if self.timestamp is not None and (
            isinstance(self.timestamp, bool) or not isinstance(self.timestamp, int)
        ):
            raise InvalidInteraction(
                f"timestamp must be an integer, got {self.timestamp!r}"
            )

    @property
    def kind_pair(self) -> tuple[EntityKind, EntityKind]:
        return (self.source.kind, self.target.kind)


_Index = dict[EntityRef, dict[EntityKind, Counter]]


class InteractionStore:
    """Indexed multigraph of interactions.

    Repeated ``(source, target)`` pairs are kept as separate interactions.
    The forward index maps an entity to the multiplicity of each outgoing
    target (grouped by target kind), the reverse index does the same for
    incoming sources. ``popularity(e)`` is the number of interactions whose
    target is ``e``.

    A store is writable until :meth:`freeze` is called; afterwards it is
    read-only and can be shared between threads.
    """

    def __init__(self, interactions: Iterable[Interaction] = ()) -> None:
        self._interactions: list[Interaction] = []
        self._forward: _Index = {}
        self._reverse: _Index = {}
        self._popularity: Counter = Counter()
        self._pair_counts: Counter = Counter()
        self._frozen = False
        for interaction in interactions:
            self.add(interaction)

    # -- construction -----------------------------------------------------

    def add(self, interaction: Interaction) -> InteractionStore:
        if self._frozen:
            raise RuntimeError("store is frozen")
        if not isinstance(interaction, Interaction):
            raise TypeError(f"expected Interaction, got {type(interaction).__name__}")
        if interaction.kind_pair not in VALID_KIND_PAIRS:
            src, tgt = interaction.kind_pair
            raise InvalidInteraction(f"invalid kind pair ({src.value}, {tgt.value})")
        src, tgt = interaction.source, interaction.target
        self._interactions.append(interaction)
        self._forward.setdefault(src, {}).setdefault(tgt.kind, Counter())[tgt] += 1
        self._reverse.setdefault(tgt, {}).setdefault(src.kind, Counter())[src] += 1
        self._popularity[tgt] += 1
        self._pair_counts[interaction.kind_pair] += 1
        return self

    def extend(self, interactions: Iterable[Interaction]) -> InteractionStore:
        for interaction in interactions:
            self.add(interaction)
        return self

    def freeze(self) -> InteractionStore:
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def copy(self) -> InteractionStore:
        """Writable copy holding the same interactions."""
        return InteractionStore(self._interactions)

    # -- reads ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._interactions)

    def __iter__(self) -> Iterator[Interaction]:
        return iter(self._interactions)

    @property
    def interactions(self) -> tuple[Interaction, ...]:
        return tuple(self._interactions)

    def targets_of(self, entity: EntityRef, target_kind: EntityKind) -> set[EntityRef]:
        return set(self._forward.get(entity, {}).get(target_kind, ()))

    def sources_of(self, entity: EntityRef, source_kind: EntityKind) -> set[EntityRef]:
        return set(self._reverse.get(entity, {}).get(source_kind, ()))

    def linked(self, entity: EntityRef, kind: EntityKind):
        """Distinct entities of ``kind`` sharing an interaction with ``entity``.

        Direction is implied by the kinds, so at most one of the two indices
        can contribute. Returns a live keys view; callers must not rely on it
        after further writes.
        """
        if (entity.kind, kind) in VALID_KIND_PAIRS:
            counts = self._forward.get(entity, {}).get(kind)
        else:
            counts = self._reverse.get(entity, {}).get(kind)
        return counts.keys() if counts else frozenset()

    def degree(self, entity: EntityRef, kind: EntityKind) -> int:
        """Number of interactions (with multiplicity) between ``entity`` and ``kind``."""
        if (entity.kind, kind) in VALID_KIND_PAIRS:
            counts = self._forward.get(entity, {}).get(kind)
        else:
            counts = self._reverse.get(entity, {}).get(kind)
        return sum(counts.values()) if counts else 0

    def popularity(self, entity: EntityRef) -> int:
        return self._popularity.get(entity, 0)

    def entities(self, kind: EntityKind) -> set[EntityRef]:
        found = {e for e in self._forward if e.kind is kind}
        found.update(e for e in self._reverse if e.kind is kind)
        return found

    def count(self, source_kind: EntityKind, target_kind: EntityKind) -> int:
        """Number of interactions with the given kind pair."""
        return self._pair_counts.get((source_kind, target_kind), 0)

    def has_kind_pair(self, source_kind: EntityKind, target_kind: EntityKind) -> bool:
        return self.count(source_kind, target_kind) > 0

    def index_snapshot(self) -> tuple[dict, dict, dict]:
        """Plain-dict copy of (forward, reverse, popularity) for comparisons."""

        def plain(index: _Index) -> dict:
            return {
                e: {k: dict(c) for k, c in by_kind.items() if c}
                for e, by_kind in index.items()
            }

        return plain(self._forward), plain(self._reverse), dict(self._popularity)

    def __repr__(self) -> str:
        state = "frozen" if self._frozen else "open"
        return f"<InteractionStore {len(self)} interactions, {state}>"


def add_interaction(store: InteractionStore, interaction: Interaction) -> InteractionStore:
    return store.add(interaction)


def targets_of(
    store: InteractionStore, entity: EntityRef, target_kind: EntityKind
) -> set[EntityRef]:
    return store.targets_of(entity, target_kind)


def project_dataset_service(store: InteractionStore) -> InteractionStore:
    """Link each dataset to each service that some user interacted with too.

    One ``dataset -> service`` interaction is emitted per distinct pair; its
    weight is the number of distinct users behind the pair. When timestamps
    are available the link gets the earliest moment at which one of those
    users had touched both entities, i.e. ``min over users of
    max(first(u, d), first(u, s))``. Links are ordered by (dataset id,
    service id). The result is frozen.
    """
    first_seen: dict[tuple[EntityRef, EntityRef], int] = {}
    for interaction in store:
        if interaction.source.kind is not EntityKind.USER or interaction.timestamp is None:
            continue
        key = (interaction.source, interaction.target)
        ts = interaction.timestamp
        if key not in first_seen or ts < first_seen[key]:
            first_seen[key] = ts

    weights: Counter = Counter()
    linked_at: dict[tuple[EntityRef, EntityRef], int] = {}
    for u in store.entities(EntityKind.USER):
        datasets = store.linked(u, EntityKind.DATASET)
        services = store.linked(u, EntityKind.SERVICE)
        if not datasets or not services:
            continue
        for d in datasets:
            td = first_seen.get((u, d))
            for s in services:
                weights[(d, s)] += 1
                ts = first_seen.get((u, s))
                if td is None or ts is None:
                    continue
                formed = max(td, ts)
                prev = linked_at.get((d, s))
                if prev is None or formed < prev:
                    linked_at[(d, s)] = formed

    projected = InteractionStore()
    for d, s in sorted(weights, key=lambda pair: (pair[0].id, pair[1].id)):
        projected.add(
            Interaction(d, s, weight=weights[(d, s)], timestamp=linked_at.get((d, s)))
        )
    return projected.freeze()
