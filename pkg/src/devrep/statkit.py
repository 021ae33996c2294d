"""Response-analysis statistics: chi-squared independence and Krippendorff's alpha."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

from .distributions import chi_squared_sf
from .errors import ValidationError


@dataclass(frozen=True)
class ChiSquaredResult:
    statistic: float
    df: int
    p: float


class ContingencyTable:
    """An R x C grid of non-negative counts with R, C >= 2."""

    def __init__(self, counts: Sequence[Sequence[int]]):
        rows = [list(row) for row in counts]
        if len(rows) < 2 or any(len(row) < 2 for row in rows):
            raise ValidationError("contingency table must be at least 2x2")
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise ValidationError("contingency table rows have unequal lengths")
        for row in rows:
            for value in row:
                if not isinstance(value, int) or value < 0:
                    raise ValidationError(
                        f"contingency counts must be non-negative integers,"
                        f" got {value!r}"
                    )
        if sum(sum(row) for row in rows) == 0:
            raise ValidationError("contingency table total must be positive")
        self.counts = rows

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.counts), len(self.counts[0])


def chi_squared_independence(table: ContingencyTable) -> ChiSquaredResult:
    """Pearson chi-squared test of independence, no continuity correction.

    Expected counts are row_total * col_total / grand_total; a zero expected
    cell (an all-zero row or column) is a validation error.
    """
    rows, cols = table.shape
    row_totals = [sum(row) for row in table.counts]
    col_totals = [sum(row[j] for row in table.counts) for j in range(cols)]
    total = sum(row_totals)
    if any(t == 0 for t in row_totals) or any(t == 0 for t in col_totals):
        raise ValidationError("expected count of zero: all-zero row or column")
    statistic = 0.0
    for i in range(rows):
        for j in range(cols):
            expected = row_totals[i] * col_totals[j] / total
            diff = table.counts[i][j] - expected
            statistic += diff * diff / expected
    df = (rows - 1) * (cols - 1)
    return ChiSquaredResult(
        statistic=statistic, df=df, p=chi_squared_sf(statistic, df)
    )


class ReliabilityData:
    """Coders x units grid of nominal codes; None marks a missing value."""

    def __init__(self, grid: Sequence[Sequence[Hashable | None]]):
        rows = [list(row) for row in grid]
        if rows:
            width = len(rows[0])
            if any(len(row) != width for row in rows):
                raise ValidationError("reliability grid rows have unequal lengths")
        self.grid = rows
        pairable = sum(
            m for m in (len(self._unit_values(u)) for u in range(self.unit_count))
            if m >= 2
        )
        if pairable < 2:
            raise ValidationError(
                "reliability data needs at least 2 pairable values"
            )

    @property
    def unit_count(self) -> int:
        return len(self.grid[0]) if self.grid else 0

    def _unit_values(self, unit: int) -> list[Hashable]:
        return [row[unit] for row in self.grid if row[unit] is not None]

    def units(self) -> list[list[Hashable]]:
        return [self._unit_values(u) for u in range(self.unit_count)]


def krippendorff_alpha(data: ReliabilityData) -> float:
    """Krippendorff's alpha for nominal codes via the coincidence matrix.

    alpha = 1 - D_o / D_e, where D_o is the observed share of disagreeing
    value pairs within units and D_e the share expected from the pooled
    value frequencies. Units carrying fewer than two values are skipped.
    When every pairable value is identical, D_e is zero and agreement is
    vacuously perfect; 1.0 is returned.
    """
    coincidence: dict[tuple[Hashable, Hashable], float] = {}
    totals: dict[Hashable, float] = {}
    n = 0.0
    for values in data.units():
        m = len(values)
        if m < 2:
            continue
        share = 1.0 / (m - 1)
        for i, a in enumerate(values):
            totals[a] = totals.get(a, 0.0) + 1.0
            n += 1.0
            for j, b in enumerate(values):
                if i == j:
                    continue
                coincidence[(a, b)] = coincidence.get((a, b), 0.0) + share
    disagreement = sum(v for (a, b), v in coincidence.items() if a != b)
    observed = disagreement / n
    expected = sum(
        totals[a] * totals[b]
        for a in totals
        for b in totals
        if a != b
    ) / (n * (n - 1.0))
    if expected == 0.0:
        return 1.0
    return 1.0 - observed / expected
