"""Score aggregation across iterations, papers, and conditions.

Pure fold over complete reports: per-group per-metric mean and a
normal-approximation 95% confidence half-width (1.96 x s / sqrt(n),
sample standard deviation).  With fewer than two samples the CI is
undefined and flagged, never silently zero.
"""

from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass

from ..errors import EmptyInput
from .rubric import METRIC_KEYS
from .scorer import EvaluationReport

log = logging.getLogger(__name__)

Z_95 = 1.96

GROUP_FIELDS = ("condition", "iteration", "paper_id")


def confidence_half_width(values: list[float]) -> float | None:
    """1.96 x sample std / sqrt(n); None (undefined) for n < 2."""
    n = len(values)
    if n < 2:
        return None
    mean = sum(values) / n
    variance = sum((v - mean) ** 2 for v in values) / (n - 1)
    return Z_95 * math.sqrt(variance) / math.sqrt(n)


@dataclass(frozen=True)
class AggregateRow:
    condition: str | None
    iteration: int | None
    paper_id: str | None
    metric: str
    mean: float
    ci_half_width: float | None
    n: int

    @property
    def ci_defined(self) -> bool:
        return self.ci_half_width is not None


def aggregate_scores(reports: list[EvaluationReport],
                     group_by: tuple[str, ...] = ("condition", "iteration"),
                     ) -> list[AggregateRow]:
    """Aggregate complete reports into per-group per-metric rows.

    Args:
        reports: evaluation reports; incomplete ones (flagged metrics)
            are dropped with a warning.
        group_by: subset of {condition, iteration, paper_id}.

    Returns:
        Rows sorted by group then metric order; permutation-invariant
        in the input.

    Raises:
        EmptyInput: no complete report to aggregate.
        ValueError: unknown grouping field.
    """
    for fieldname in group_by:
        if fieldname not in GROUP_FIELDS:
            raise ValueError(f"unknown grouping field {fieldname!r}")
    usable = [r for r in reports if r.complete]
    dropped = len(reports) - len(usable)
    if dropped:
        log.warning("dropped %d incomplete report(s) from aggregation", dropped)
    if not usable:
        raise EmptyInput("no complete evaluation reports to aggregate")

    groups: dict[tuple, list[EvaluationReport]] = {}
    for report in usable:
        key = tuple(getattr(report, f) for f in group_by)
        groups.setdefault(key, []).append(report)

    rows: list[AggregateRow] = []
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        members = groups[key]
        fields = dict.fromkeys(GROUP_FIELDS)
        fields.update(dict(zip(group_by, key)))
        for metric in METRIC_KEYS:
            values = [float(r.scores[metric]) for r in members]
            rows.append(AggregateRow(
                condition=fields["condition"],
                iteration=fields["iteration"],
                paper_id=fields["paper_id"],
                metric=metric,
                mean=sum(values) / len(values),
                ci_half_width=confidence_half_width(values),
                n=len(values),
            ))
    return rows


def write_aggregate_csv(rows: list[AggregateRow], path: str) -> None:
    """Write rows to a CSV consumable for plotting."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["condition", "iteration", "paper_id", "metric",
                         "mean", "ci_half_width", "n", "ci_defined"])
        for row in rows:
            writer.writerow([
                row.condition if row.condition is not None else "",
                row.iteration if row.iteration is not None else "",
                row.paper_id if row.paper_id is not None else "",
                row.metric,
                f"{row.mean:.6f}",
                f"{row.ci_half_width:.6f}" if row.ci_defined else "",
                row.n,
                int(row.ci_defined),
            ])
