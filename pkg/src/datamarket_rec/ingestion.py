"""Loading, exporting, summarising and generating interaction data."""

from __future__ import annotations

import csv
import logging
import os
from collections.abc import Iterable, Mapping
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .model import EntityKind, EntityRef, Interaction, InteractionStore, InvalidInteraction

__all__ = [
    "CANONICAL_HEADER",
    "CanonicalFormatError",
    "ColumnMapping",
    "MetaKaggleMapping",
    "StoreStatistics",
    "SNAPSHOT_2017_11_15",
    "load_canonical",
    "export_canonical",
    "write_canonical",
    "adapt_meta_kaggle",
    "compute_statistics",
    "compare_with_snapshot",
    "generate_synthetic",
]

log = logging.getLogger(__name__)

CANONICAL_HEADER = ("source_kind", "source_id", "target_kind", "target_id", "weight", "timestamp")
_REQUIRED = CANONICAL_HEADER[:4]


class CanonicalFormatError(ValueError):
    """Problem in an input file; ``line`` is 1-based and counts the header."""

    def __init__(self, message: str, path: str | os.PathLike | None = None, line: int | None = None):
        self.path = None if path is None else str(path)
        self.line = line
        where = ""
        if self.path is not None:
            where = self.path + (f":{line}" if line is not None else "") + ": "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


# -- canonical format ---------------------------------------------------------


def _parse_weight(text: str) -> float:
    text = text.strip()
    if not text:
        return 1
    try:
        return int(text)
    except ValueError:
        return float(text)


def _parse_timestamp(text: str) -> int | None:
    text = text.strip()
    return int(text) if text else None


def _format_weight(weight: float) -> str:
    if isinstance(weight, int) or float(weight).is_integer():
        return str(int(weight))
    return repr(float(weight))


def read_canonical(path: str | os.PathLike) -> Iterable[Interaction]:
    """Stream interactions from a canonical CSV file in file order."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise CanonicalFormatError("empty file, expected a header", path, 1)
        header = [h.strip() for h in header]
        missing = [c for c in _REQUIRED if c not in header]
        if missing:
            raise CanonicalFormatError(f"header lacks column(s) {', '.join(missing)}", path, 1)
        pos = {name: header.index(name) for name in CANONICAL_HEADER if name in header}
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            cells = {name: row[i] if i < len(row) else "" for name, i in pos.items()}
            try:
                src_kind = EntityKind(cells["source_kind"].strip().lower())
                tgt_kind = EntityKind(cells["target_kind"].strip().lower())
            except ValueError:
                raise CanonicalFormatError(
                    f"unknown entity kind in {cells['source_kind']!r}/{cells['target_kind']!r}",
                    path,
                    line,
                ) from None
            try:
                yield Interaction(
                    EntityRef(src_kind, cells["source_id"].strip()),
                    EntityRef(tgt_kind, cells["target_id"].strip()),
                    weight=_parse_weight(cells.get("weight", "")),
                    timestamp=_parse_timestamp(cells.get("timestamp", "")),
                )
            except InvalidInteraction as exc:
                raise CanonicalFormatError(str(exc), path, line) from None
            except ValueError as exc:
                raise CanonicalFormatError(f"malformed row: {exc}", path, line) from None


def load_canonical(path: str | os.PathLike) -> InteractionStore:
    """Load a canonical CSV file into a frozen store."""
    return InteractionStore(read_canonical(path)).freeze()


def write_canonical(interactions: Iterable[Interaction], path: str | os.PathLike) -> int:
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CANONICAL_HEADER)
        for i in interactions:
            writer.writerow(
                (
                    i.source.kind.value,
                    i.source.id,
                    i.target.kind.value,
                    i.target.id,
                    _format_weight(i.weight),
                    "" if i.timestamp is None else str(i.timestamp),
                )
            )
            count += 1
    return count


def export_canonical(store: InteractionStore, path: str | os.PathLike) -> int:
    """Write ``store`` as canonical CSV; returns the number of rows."""
    return write_canonical(store, path)


# -- Meta Kaggle adapter -------------------------------------------------------


@dataclass(frozen=True)
class ColumnMapping:
    """Where to find user, item and (optionally) time in one input table.

    ``timestamp_format`` is a ``strptime`` pattern; without it the timestamp
    column must hold integer epoch seconds. Parsed times are taken as UTC.
    """

    user_column: str
    item_column: str
    timestamp_column: str | None = None
    timestamp_format: str | None = None


@dataclass(frozen=True)
class MetaKaggleMapping:
    forum: ColumnMapping
    votes: ColumnMapping

    @classmethod
    def from_dict(cls, data: Mapping) -> MetaKaggleMapping:
        def section(name: str, item_key: str) -> ColumnMapping:
            try:
                raw = data[name]
                return ColumnMapping(
                    user_column=raw["user_column"],
                    item_column=raw[item_key],
                    timestamp_column=raw.get("timestamp_column"),
                    timestamp_format=raw.get("timestamp_format"),
                )
            except KeyError as exc:
                raise ValueError(f"mapping section [{name}] lacks key {exc.args[0]!r}") from None

        return cls(forum=section("forum", "dataset_column"), votes=section("votes", "service_column"))

    @classmethod
    def load(cls, path: str | os.PathLike) -> MetaKaggleMapping:
        from .config import read_toml

        return cls.from_dict(read_toml(path))


def _read_table(
    path: str | os.PathLike,
    mapping: ColumnMapping,
    source_kind: EntityKind,
    target_kind: EntityKind,
) -> Iterable[Interaction]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        columns = reader.fieldnames or []
        wanted = [mapping.user_column, mapping.item_column]
        if mapping.timestamp_column:
            wanted.append(mapping.timestamp_column)
        for col in wanted:
            if col not in columns:
                raise CanonicalFormatError(f"missing configured column {col!r}", path, 1)
        skipped = 0
        for row in reader:
            uid = (row[mapping.user_column] or "").strip()
            iid = (row[mapping.item_column] or "").strip()
            if not uid or not iid:
                skipped += 1
                continue
            ts = None
            if mapping.timestamp_column:
                raw = (row[mapping.timestamp_column] or "").strip()
                try:
                    if not raw:
                        ts = None
                    elif mapping.timestamp_format:
                        parsed = datetime.strptime(raw, mapping.timestamp_format)
                        ts = int(parsed.replace(tzinfo=timezone.utc).timestamp())
                    else:
                        ts = int(raw)
                except ValueError:
                    raise CanonicalFormatError(
                        f"bad timestamp {raw!r}", path, reader.line_num
                    ) from None
            try:
                yield Interaction(EntityRef(source_kind, uid), EntityRef(target_kind, iid), timestamp=ts)
            except ValueError as exc:
                raise CanonicalFormatError(str(exc), path, reader.line_num) from None
        if skipped:
            log.warning("%s: skipped %d rows with an empty id", path, skipped)


def adapt_meta_kaggle(
    forum_interactions_path: str | os.PathLike,
    vote_interactions_path: str | os.PathLike,
    mapping: MetaKaggleMapping,
    output_path: str | os.PathLike,
) -> int:
    """Convert forum posts and votes into a canonical file.

    Forum rows become ``user -> dataset`` records and vote rows become
    ``user -> service`` records. No dataset-service links are written.
    Returns the number of records.
    """
    forum = _read_table(forum_interactions_path, mapping.forum, EntityKind.USER, EntityKind.DATASET)
    votes = _read_table(vote_interactions_path, mapping.votes, EntityKind.USER, EntityKind.SERVICE)

    def chained():
        yield from forum
        yield from votes

    return write_canonical(chained(), output_path)


# -- statistics ---------------------------------------------------------------


@dataclass(frozen=True)
class StoreStatistics:
    users: int = 0
    datasets: int = 0
    services: int = 0
    user_dataset: int = 0
    user_service: int = 0
    dataset_service: int = 0

    _LABELS = (
        ("users", "Number of users"),
        ("datasets", "Number of datasets"),
        ("services", "Number of services"),
        ("user_dataset", "Number of user/dataset interactions"),
        ("user_service", "Number of user/service interactions"),
        ("dataset_service", "Number of dataset/service interactions"),
    )

    def as_tuple(self) -> tuple[int, ...]:
        return (
            self.users,
            self.datasets,
            self.services,
            self.user_dataset,
            self.user_service,
            self.dataset_service,
        )

    def to_dict(self) -> dict[str, int]:
        return asdict(self)

    def format(self) -> str:
        return "".join(f"{label}: {getattr(self, name)}\n" for name, label in self._LABELS)


def compute_statistics(store: InteractionStore) -> StoreStatistics:
    return StoreStatistics(
        users=len(store.entities(EntityKind.USER)),
        datasets=len(store.entities(EntityKind.DATASET)),
        services=len(store.entities(EntityKind.SERVICE)),
        user_dataset=store.count(EntityKind.USER, EntityKind.DATASET),
        user_service=store.count(EntityKind.USER, EntityKind.SERVICE),
        dataset_service=store.count(EntityKind.DATASET, EntityKind.SERVICE),
    )


# Reference counts for the 2017-11-15 Meta Kaggle snapshot.
SNAPSHOT_2017_11_15 = StoreStatistics(6108, 45, 3334, 2962, 18593, 95249)
_TEXT_USER_DATASET = 2926


def compare_with_snapshot(stats: StoreStatistics) -> list[str]:
    """Human-readable mismatches against the reference snapshot counts."""
    problems = []
    for name, label in StoreStatistics._LABELS:
        got, want = getattr(stats, name), getattr(SNAPSHOT_2017_11_15, name)
        if got != want:
            note = ""
            if name == "user_dataset":
                note = (
                    f" ({_TEXT_USER_DATASET} is also quoted for this count;"
                    " snapshot drift is also possible)"
                )
            problems.append(f"{label}: got {got}, expected {want}{note}")
    return problems


# -- synthetic data -------------------------------------------------------------


def _powerlaw_probs(n: int, skew: float, rng: np.random.Generator) -> np.ndarray:
    weights = np.arange(1, n + 1, dtype=float) ** -skew
    weights = weights[rng.permutation(n)]
    return weights / weights.sum()


def generate_synthetic(
    n_users: int,
    n_datasets: int,
    n_services: int,
    *,
    dataset_density: float = 2.0,
    service_density: float = 6.0,
    skew: float = 1.0,
    seed: int = 0,
    timestamps: bool = True,
    start_time: int = 1_500_000_000,
) -> InteractionStore:
    """Seeded random tripartite store with power-law candidate popularity.

    Each user draws a geometric number of dataset events (mean
    ``dataset_density``) and of service events (mean ``service_density``);
    each event picks a candidate with probability proportional to
    ``rank ** -skew`` over a shuffled popularity ranking. Users, datasets
    and services that drew nothing get one extra event so the entity counts
    match the request exactly.
    """
    if min(n_users, n_datasets, n_services) < 1:
        raise ValueError("entity counts must be >= 1")
    if dataset_density <= 0 or service_density <= 0:
        raise ValueError("densities must be positive")
    rng = np.random.default_rng(seed)
    users = [EntityRef(EntityKind.USER, f"u{i:0{len(str(n_users - 1))}d}") for i in range(n_users)]
    datasets = [EntityRef(EntityKind.DATASET, f"d{i:0{len(str(n_datasets - 1))}d}") for i in range(n_datasets)]
    services = [EntityRef(EntityKind.SERVICE, f"s{i:0{len(str(n_services - 1))}d}") for i in range(n_services)]
    d_probs = _powerlaw_probs(n_datasets, skew, rng)
    s_probs = _powerlaw_probs(n_services, skew, rng)

    events: list[tuple[int, int, int]] = []  # (user index, kind flag, candidate index)
    for u in range(n_users):
        n_d = int(rng.geometric(1.0 / (1.0 + dataset_density))) - 1
        n_s = int(rng.geometric(1.0 / (1.0 + service_density))) - 1
        if n_d + n_s == 0:
            if rng.random() < dataset_density / (dataset_density + service_density):
                n_d = 1
            else:
                n_s = 1
        events.extend((u, 0, int(c)) for c in rng.choice(n_datasets, size=n_d, p=d_probs))
        events.extend((u, 1, int(c)) for c in rng.choice(n_services, size=n_s, p=s_probs))

    hit_d = {c for _, flag, c in events if flag == 0}
    hit_s = {c for _, flag, c in events if flag == 1}
    for c in range(n_datasets):
        if c not in hit_d:
            events.append((int(rng.integers(n_users)), 0, c))
    for c in range(n_services):
        if c not in hit_s:
            events.append((int(rng.integers(n_users)), 1, c))

    span = 365 * 24 * 3600
    times = np.sort(rng.integers(start_time, start_time + span, size=len(events)))
    order = rng.permutation(len(events))

    store = InteractionStore()
    for slot, idx in enumerate(order):
        u, flag, c = events[idx]
        target = datasets[c] if flag == 0 else services[c]
        ts = int(times[slot]) if timestamps else None
        store.add(Interaction(users[u], target, timestamp=ts))
    return store.freeze()


def ensure_readable(path: str | os.PathLike) -> Path:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    return path
