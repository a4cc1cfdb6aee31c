"""Aggregation of run records into per-(scenario, planner) statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass


def quantile(sorted_values, p: float) -> float:
    """Linear interpolation between order statistics at ``(n - 1) * p``."""
    n = len(sorted_values)
    if n == 0:
        raise ValueError("quantile of an empty sample")
    h = (n - 1) * p
    lo = math.floor(h)
    hi = min(lo + 1, n - 1)
    a = sorted_values[lo]
    b = sorted_values[hi]
    return a + (h - lo) * (b - a)


def median(sorted_values) -> float:
    n = len(sorted_values)
    if n == 0:
        raise ValueError("median of an empty sample")
    mid = n // 2
    if n % 2:
        return sorted_values[mid]
    return (sorted_values[mid - 1] + sorted_values[mid]) / 2.0


@dataclass(frozen=True)
class Summary:
    """Five-number style summary of one metric over one cell."""

    count: int
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...]
    values: tuple[float, ...]

    @classmethod
    def of(cls, values) -> "Summary | None":
        xs = sorted(float(v) for v in values)
        if not xs:
            return None
        q1 = quantile(xs, 0.25)
        q3 = quantile(xs, 0.75)
        iqr = q3 - q1
        lo_fence = q1 - 1.5 * iqr
        hi_fence = q3 + 1.5 * iqr
        inside = [x for x in xs if lo_fence <= x <= hi_fence]
        return cls(len(xs), median(xs), q1, q3, inside[0], inside[-1],
                   tuple(x for x in xs if x < lo_fence or x > hi_fence), tuple(xs))


@dataclass(frozen=True)
class CellStats:
    scenario: str
    planner: str
    runs: int
    solved: int
    with_cost: int
    missing: int
    time: Summary | None
    cost: Summary | None

    @property
    def success_rate(self) -> float:
        return self.solved / self.runs if self.runs else 0.0


@dataclass(frozen=True)
class ResultsTable:
    cells: tuple[CellStats, ...]

    def __iter__(self):
        return iter(self.cells)

    def __len__(self) -> int:
        return len(self.cells)

    def cell(self, scenario: str, planner: str) -> CellStats:
        for c in self.cells:
            if c.scenario == scenario and c.planner == planner:
                return c
        raise KeyError((scenario, planner))

    @property
    def scenarios(self) -> list[str]:
        return sorted({c.scenario for c in self.cells})

    def for_scenario(self, scenario: str) -> list[CellStats]:
        return [c for c in self.cells if c.scenario == scenario]


def aggregate(records) -> ResultsTable:
    """Per-cell success rate, missing count and time/cost summaries.

    A run "has a cost" when it ended Solved or ApproximateSolution; every
    other run counts as a missing value. Time and cost summaries are taken
    over the runs that have a cost. Success rate counts Solved runs only.
    """
    groups: dict[tuple[str, str], list] = {}
    for r in records:
        groups.setdefault((r.scenario, r.planner), []).append(r)
    cells = []
    for (scenario, planner) in sorted(groups):
        rs = groups[(scenario, planner)]
        costed = [r for r in rs if r.cost is not None]
        cells.append(CellStats(
            scenario=scenario, planner=planner, runs=len(rs),
            solved=sum(1 for r in rs if r.status == "Solved"),
            with_cost=len(costed), missing=len(rs) - len(costed),
            time=Summary.of(r.wall_time_seconds for r in costed),
            cost=Summary.of(r.cost for r in costed)))
    return ResultsTable(tuple(cells))
