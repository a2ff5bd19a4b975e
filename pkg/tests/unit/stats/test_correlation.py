"""Unit tests for rank correlations."""

import numpy as np
import pytest
from scipy import stats as scipy_stats

from src.stats.correlation import CorrelationMethod, correlate, kendall, spearman
from src.utils.exceptions import LengthMismatch, TooFewSamples, ZeroVariance

pytestmark = pytest.mark.unit

# Per-method MIN and SPREAD of a published 13-method lead sweep (percent)
SWEEP_MIN = (96, 41, 69, 92, 86, 82, 82, 92, 50, 6, 36, 52, 59)
SWEEP_SPREAD = (2, 19, 9, 5, 9, 10, 11, 6, 13, 8, 10, 21, 13)


class TestCoefficients:
    """Coefficients against hand-computed and reference values."""

    def test_lead_sweep_spearman(self) -> None:
        result = spearman(SWEEP_MIN, SWEEP_SPREAD, permutations=200)
        assert result.coefficient == pytest.approx(-0.59613, abs=1e-4)
        assert result.n == 13
        assert result.method is CorrelationMethod.SPEARMAN

    def test_lead_sweep_kendall(self) -> None:
        # 18 concordant, 55 discordant; two tied pairs in x, three in y
        result = kendall(SWEEP_MIN, SWEEP_SPREAD, permutations=200)
        assert result.coefficient == pytest.approx(-37 / np.sqrt(76 * 75), abs=1e-6)
        assert result.coefficient == pytest.approx(-0.49008, abs=1e-4)

    def test_single_swap(self) -> None:
        result = kendall([1, 2, 3, 4], [1, 2, 4, 3], permutations=100)
        assert result.coefficient == pytest.approx(4 / 6)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_agrees_with_scipy_on_tied_data(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        x = rng.integers(0, 6, size=25).astype(float)
        y = x + rng.integers(-3, 4, size=25)
        assert spearman(x, y, permutations=10).coefficient == pytest.approx(
            scipy_stats.spearmanr(x, y).statistic, abs=1e-12
        )
        assert kendall(x, y, permutations=10).coefficient == pytest.approx(
            scipy_stats.kendalltau(x, y).statistic, abs=1e-12
        )

    @pytest.mark.parametrize("method", list(CorrelationMethod))
    def test_monotone_extremes(self, method: CorrelationMethod) -> None:
        x = np.arange(10.0)
        assert correlate(method, x, x**3, permutations=50).coefficient == pytest.approx(1.0)
        assert correlate(method, x, -x, permutations=50).coefficient == pytest.approx(-1.0)


class TestPermutationPValue:
    @pytest.mark.parametrize("method", list(CorrelationMethod))
    def test_bounds_and_reproducibility(self, method: CorrelationMethod) -> None:
        x = np.random.default_rng(0).normal(size=12)
        y = np.random.default_rng(1).normal(size=12)
        first = correlate(method, x, y, permutations=999, seed=42)
        again = correlate(method, x, y, permutations=999, seed=42)
        assert first.p_value == again.p_value
        assert 1 / 1000 <= first.p_value <= 1.0
        assert first.permutations == 999

    def test_strong_association_is_significant(self) -> None:
        x = np.arange(15.0)
        result = spearman(x, x + np.random.default_rng(3).normal(0.0, 0.5, 15), permutations=2000)
        assert result.p_value < 0.01

    def test_larger_than_one_chunk(self) -> None:
        x = np.arange(6.0)
        y = np.array([1.0, 0.0, 3.0, 2.0, 5.0, 4.0])
        result = kendall(x, y, permutations=4500, seed=7)
        assert 0.0 < result.p_value < 1.0

    def test_seed_changes_the_draws(self) -> None:
        x = np.random.default_rng(5).normal(size=10)
        y = np.random.default_rng(6).normal(size=10)
        p = {spearman(x, y, permutations=300, seed=s).p_value for s in range(5)}
        assert len(p) > 1


class TestErrors:
    """Tests for rejected inputs."""

    def test_length_mismatch(self) -> None:
        with pytest.raises(LengthMismatch):
            spearman([1, 2, 3], [1, 2, 3, 4])

    def test_too_few_pairs(self) -> None:
        with pytest.raises(TooFewSamples):
            kendall([1, 2], [2, 1])

    @pytest.mark.parametrize("method", list(CorrelationMethod))
    def test_constant_variable(self, method: CorrelationMethod) -> None:
        with pytest.raises(ZeroVariance):
            correlate(method, [1, 2, 3, 4], [5, 5, 5, 5])
