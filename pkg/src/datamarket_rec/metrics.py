"""Top-k ranking metrics with binary relevance.

Two reciprocal-rank variants are provided. ``mrr_standard_at_k`` is the usual
reciprocal rank of the first hit. ``mrr_paper_at_k`` averages the reciprocal
ranks of *all* hits over the number of relevant items; with ten relevant
items its maximum is H_10 / 10 ~= 0.2929. An MRR@10 below P@1 can only come
from the second variant, so reports carry both and label them.
"""

from __future__ import annotations

import math
from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass, fields

__all__ = [
    "EvaluationCase",
    "MetricReport",
    "TABLE_COLUMNS",
    "precision_at_k",
    "recall_at_k",
    "f1_at_k",
    "mrr_standard_at_k",
    "mrr_paper_at_k",
    "average_precision_at_k",
    "ndcg_at_k",
    "aggregate",
]


@dataclass(frozen=True)
class EvaluationCase:
    """Ranked recommendations for one target plus its withheld items."""

    recommended: tuple[Hashable, ...]
    relevant: frozenset

    def __init__(self, recommended: Iterable[Hashable], relevant: Iterable[Hashable]):
        recommended = tuple(recommended)
        if len(set(recommended)) != len(recommended):
            raise ValueError("recommended list contains duplicates")
        object.__setattr__(self, "recommended", recommended)
        object.__setattr__(self, "relevant", frozenset(relevant))

    def hits(self, k: int) -> list[bool]:
        return [item in self.relevant for item in self.recommended[:k]]


def _check_k(k: int) -> None:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")


def _require_relevant(case: EvaluationCase) -> None:
    if not case.relevant:
        raise ValueError("case has no relevant items")


def precision_at_k(case: EvaluationCase, k: int) -> float:
    _check_k(k)
    return sum(case.hits(k)) / k


def recall_at_k(case: EvaluationCase, k: int) -> float:
    _check_k(k)
    _require_relevant(case)
    return sum(case.hits(k)) / len(case.relevant)


def f1_at_k(case: EvaluationCase, k: int) -> float:
    p = precision_at_k(case, k)
    r = recall_at_k(case, k)
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def mrr_standard_at_k(case: EvaluationCase, k: int) -> float:
    _check_k(k)
    for rank, hit in enumerate(case.hits(k), start=1):
        if hit:
            return 1.0 / rank
    return 0.0


def mrr_paper_at_k(case: EvaluationCase, k: int) -> float:
    """Mean of 1/rank over relevant items, misses contributing 0."""
    _check_k(k)
    _require_relevant(case)
    total = sum(1.0 / rank for rank, hit in enumerate(case.hits(k), start=1) if hit)
    return total / len(case.relevant)


def average_precision_at_k(case: EvaluationCase, k: int) -> float:
    _check_k(k)
    _require_relevant(case)
    found = 0
    total = 0.0
    for rank, hit in enumerate(case.hits(k), start=1):
        if hit:
            found += 1
            total += found / rank
    return total / min(len(case.relevant), k)


def ndcg_at_k(case: EvaluationCase, k: int) -> float:
    _check_k(k)
    _require_relevant(case)
    dcg = sum(1.0 / math.log2(rank + 1) for rank, hit in enumerate(case.hits(k), start=1) if hit)
    ideal = sum(1.0 / math.log2(rank + 1) for rank in range(1, min(len(case.relevant), k) + 1))
    return dcg / ideal


TABLE_COLUMNS = (
    "P@1",
    "F1@5",
    "R@10",
    "MRR@10(paper)",
    "MRR@10(standard)",
    "MAP@10",
    "nDCG@10",
)


@dataclass(frozen=True)
class MetricReport:
    """Mean metrics over evaluated targets.

    With ``n_cases == 0`` every value is NaN and :attr:`defined` is False.
    """

    p_at_1: float
    f1_at_5: float
    r_at_10: float
    mrr_paper_at_10: float
    mrr_standard_at_10: float
    map_at_10: float
    ndcg_at_10: float
    n_cases: int

    @property
    def defined(self) -> bool:
        return self.n_cases > 0

    def values(self) -> tuple[float, ...]:
        return (
            self.p_at_1,
            self.f1_at_5,
            self.r_at_10,
            self.mrr_paper_at_10,
            self.mrr_standard_at_10,
            self.map_at_10,
            self.ndcg_at_10,
        )

    def as_row(self, digits: int = 6) -> list[str]:
        if not self.defined:
            return ["n/a"] * len(TABLE_COLUMNS)
        return [f"{v:.{digits}f}" for v in self.values()]

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = None if isinstance(value, float) and math.isnan(value) else value
        return out

    @classmethod
    def undefined(cls) -> MetricReport:
        nan = float("nan")
        return cls(nan, nan, nan, nan, nan, nan, nan, n_cases=0)


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def aggregate(
    cases: Sequence[EvaluationCase],
    *,
    precision_k: int = 1,
    f1_k: int = 5,
    k: int = 10,
) -> MetricReport:
    """Arithmetic mean of each per-case metric.

    Cases with an empty relevant set are skipped.
    """
    cases = [c for c in cases if c.relevant]
    if not cases:
        return MetricReport.undefined()
    return MetricReport(
        p_at_1=_mean([precision_at_k(c, precision_k) for c in cases]),
        f1_at_5=_mean([f1_at_k(c, f1_k) for c in cases]),
        r_at_10=_mean([recall_at_k(c, k) for c in cases]),
        mrr_paper_at_10=_mean([mrr_paper_at_k(c, k) for c in cases]),
        mrr_standard_at_10=_mean([mrr_standard_at_k(c, k) for c in cases]),
        map_at_10=_mean([average_precision_at_k(c, k) for c in cases]),
        ndcg_at_10=_mean([ndcg_at_k(c, k) for c in cases]),
        n_cases=len(cases),
    )
