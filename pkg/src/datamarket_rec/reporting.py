"""Tabular and JSON output for evaluation runs."""

from __future__ import annotations

import json
from collections.abc import Sequence

from .evaluation import EvaluationReport
from .metrics import TABLE_COLUMNS

__all__ = ["HEADER", "format_table", "to_json"]

HEADER = ("use_case", "algorithm", "n_cases", *TABLE_COLUMNS, "best")

# Columns that decide the per-use-case ``best`` marker; the standard MRR
# variant is informational only.
_RANKED = (0, 1, 2, 3, 5, 6)


def _best_counts(reports: Sequence[EvaluationReport]) -> list[str]:
    marks = []
    for r in reports:
        if not r.metrics.defined:
            marks.append("-")
            continue
        peers = [p for p in reports if p.use_case is r.use_case and p.metrics.defined]
        wins = 0
        for col in _RANKED:
            top = max(p.metrics.values()[col] for p in peers)
            wins += r.metrics.values()[col] == top
        marks.append(f"{wins}/{len(_RANKED)}")
    return marks


def format_table(reports: Sequence[EvaluationReport], delimiter: str = "\t", digits: int = 6) -> str:
    """One row per (use case, algorithm).

    ``best`` counts the table metrics on which a row is at least as good as
    every other row of the same use case.
    """
    lines = [delimiter.join(HEADER)]
    for report, best in zip(reports, _best_counts(reports)):
        row = [
            report.use_case.token,
            report.algorithm.value,
            str(report.metrics.n_cases),
            *report.metrics.as_row(digits),
            best,
        ]
        lines.append(delimiter.join(row))
    return "\n".join(lines) + "\n"


def to_json(reports: Sequence[EvaluationReport]) -> str:
    return json.dumps({"runs": [r.to_dict() for r in reports]}, indent=2, sort_keys=True) + "\n"
