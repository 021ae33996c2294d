"""Chi-squared independence, Krippendorff's alpha, and distribution tails."""

import math

import numpy as np
import pytest
from scipy import stats as scipy_stats
from scipy.special import betainc, gammaincc

from devrep.distributions import chi_squared_sf, f_sf, reg_beta, reg_gamma_upper
from devrep.errors import ValidationError
from devrep.statkit import (
    ContingencyTable,
    ReliabilityData,
    chi_squared_independence,
    krippendorff_alpha,
)


class TestDistributionTails:
    @pytest.mark.parametrize("a", [0.5, 1.0, 1.5, 2.0, 5.0, 25.0])
    @pytest.mark.parametrize("x", [0.01, 0.5, 1.0, 3.3333, 10.0, 60.0])
    def test_upper_gamma_matches_scipy(self, a, x):
        assert reg_gamma_upper(a, x) == pytest.approx(
            float(gammaincc(a, x)), abs=1e-10
        )

    @pytest.mark.parametrize("a,b", [(0.5, 0.5), (1.0, 3.0), (2.5, 7.0), (40.0, 2.0)])
    @pytest.mark.parametrize("x", [0.001, 0.2, 0.5, 0.8, 0.999])
    def test_incomplete_beta_matches_scipy(self, a, b, x):
        assert reg_beta(a, b, x) == pytest.approx(
            float(betainc(a, b, x)), abs=1e-10
        )

    @pytest.mark.parametrize("df", [1, 2, 3, 10])
    @pytest.mark.parametrize("x", [0.0, 0.5, 6.6667, 147.85])
    def test_chi_squared_sf(self, df, x):
        assert chi_squared_sf(x, df) == pytest.approx(
            float(scipy_stats.chi2.sf(x, df)), abs=1e-10
        )

    @pytest.mark.parametrize("df1,df2", [(1.0, 5.0), (1.0, 800.0), (3.0, 30.0)])
    @pytest.mark.parametrize("f", [0.0, 0.7, 4.2, 25.0])
    def test_f_sf(self, f, df1, df2):
        assert f_sf(f, df1, df2) == pytest.approx(
            float(scipy_stats.f.sf(f, df1, df2)), abs=1e-10
        )


class TestChiSquared:
    def test_reference_two_by_two(self):
        result = chi_squared_independence(ContingencyTable([[10, 20], [20, 10]]))
        assert result.statistic == pytest.approx(100 / 15, rel=1e-12)
        assert result.df == 1
        assert result.p == pytest.approx(0.0098, abs=1e-3)

    def test_perfect_independence(self):
        result = chi_squared_independence(ContingencyTable([[5, 5], [5, 5]]))
        assert result.statistic == 0.0
        assert result.p == 1.0

    def test_df_formula(self):
        result = chi_squared_independence(
            ContingencyTable([[5, 1, 2], [3, 4, 9], [2, 2, 2], [8, 1, 1]])
        )
        assert result.df == 6

    def test_permutation_invariance(self):
        base = chi_squared_independence(
            ContingencyTable([[10, 20, 5], [20, 10, 15]])
        )
        swapped = chi_squared_independence(
            ContingencyTable([[20, 10, 15], [10, 20, 5]])
        )
        transposed = chi_squared_independence(
            ContingencyTable([[5, 20, 10], [15, 10, 20]])
        )
        assert swapped.statistic == pytest.approx(base.statistic, rel=1e-12)
        assert transposed.statistic == pytest.approx(base.statistic, rel=1e-12)

    def test_count_scaling_scales_statistic(self):
        base = chi_squared_independence(ContingencyTable([[10, 20], [20, 10]]))
        tripled = chi_squared_independence(ContingencyTable([[30, 60], [60, 30]]))
        assert tripled.statistic == pytest.approx(3 * base.statistic, rel=1e-12)

    def test_zero_column_rejected(self):
        with pytest.raises(ValidationError):
            chi_squared_independence(ContingencyTable([[1, 0], [4, 0]]))

    def test_non_integer_rejected(self):
        with pytest.raises(ValidationError):
            ContingencyTable([[1.5, 2], [3, 4]])

    def test_too_small_rejected(self):
        with pytest.raises(ValidationError):
            ContingencyTable([[1, 2]])


class TestKrippendorffAlpha:
    def test_perfect_agreement(self):
        data = ReliabilityData([[1, 2, 3, 1], [1, 2, 3, 1]])
        assert krippendorff_alpha(data) == pytest.approx(1.0, abs=1e-12)

    def test_two_unit_half_disagreement_is_zero(self):
        # Units {1,1} and {1,2}: observed and expected disagreement both 0.5.
        data = ReliabilityData([[1, 1], [1, 2]])
        assert krippendorff_alpha(data) == pytest.approx(0.0, abs=1e-12)

    def test_all_identical_values(self):
        data = ReliabilityData([["x", "x"], ["x", "x"]])
        assert krippendorff_alpha(data) == 1.0

    def test_missing_values_skipped(self):
        data = ReliabilityData([[1, 1, None], [1, 2, 1], [None, None, 1]])
        full = ReliabilityData([[1, 1], [1, 2]])
        # The third unit has two values (1, 1) and changes the coincidence
        # matrix; just verify it computes and stays within [-1, 1].
        assert -1.0 <= krippendorff_alpha(data) <= 1.0
        assert krippendorff_alpha(full) == pytest.approx(0.0, abs=1e-12)

    def test_code_relabeling_invariance(self):
        grid = [[1, 2, 1, 3, None], [1, 2, 2, 3, 1], [2, 2, 1, 3, 1]]
        relabeled = [
            [{1: "a", 2: "b", 3: "c"}.get(v) for v in row] for row in grid
        ]
        assert krippendorff_alpha(ReliabilityData(grid)) == pytest.approx(
            krippendorff_alpha(ReliabilityData(relabeled)), abs=1e-12
        )

    def test_coder_permutation_invariance(self):
        grid = [[1, 2, 1, 3], [1, 2, 2, 3], [2, 2, 1, 3]]
        assert krippendorff_alpha(ReliabilityData(grid)) == pytest.approx(
            krippendorff_alpha(ReliabilityData(grid[::-1])), abs=1e-12
        )

    def test_matches_reference_three_coder_case(self):
        # Cross-checked against the standard coincidence-matrix computation
        # by direct enumeration below.
        grid = [
            [1, 2, 3, 3, 2, 1, 4, 1, 2, None],
            [1, 2, 3, 3, 2, 2, 4, 1, 2, 5],
            [None, 3, 3, 3, 2, 3, 4, 2, 2, 5],
        ]
        data = ReliabilityData(grid)
        alpha = krippendorff_alpha(data)
        expected = _alpha_by_direct_enumeration(grid)
        assert alpha == pytest.approx(expected, abs=1e-12)

    def test_insufficient_data_rejected(self):
        with pytest.raises(ValidationError):
            ReliabilityData([[1, None], [None, 2]])


def _alpha_by_direct_enumeration(grid):
    """Nominal alpha from first principles, no shared code with the package."""
    units = []
    for u in range(len(grid[0])):
        values = [row[u] for row in grid if row[u] is not None]
        if len(values) >= 2:
            units.append(values)
    pooled = [v for unit in units for v in unit]
    n = len(pooled)
    observed = 0.0
    for unit in units:
        m = len(unit)
        disagree = sum(
            1 for i in range(m) for j in range(m) if i != j and unit[i] != unit[j]
        )
        observed += disagree / (m - 1)
    observed /= n
    expected = sum(
        1
        for i in range(n)
        for j in range(n)
        if i != j and pooled[i] != pooled[j]
    ) / (n * (n - 1))
    return 1.0 - observed / expected
