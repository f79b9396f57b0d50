"""Unit tests for budgets, noise calibration, mechanisms and composition."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from dp_sco_toolkit.errors import DomainError, ParameterizationError
from dp_sco_toolkit.privacy import (
    NoiseSource,
    NoiseSpec,
    PrivacyBudget,
    PrivacyLedger,
    compose_advanced,
    compose_basic,
    lambda_approx_fw,
    lambda_pure_fw,
    report_noisy_max,
    shuffle_amplified_epsilon,
    sigma_noisy_md,
    subsample_amplified,
)


@pytest.mark.unit
class TestBudgetModels:
    """Tests for PrivacyBudget and NoiseSpec validation."""

    def test_pure_budget(self) -> None:
        """Test that δ defaults to 0 (pure DP)."""
        budget = PrivacyBudget(epsilon=1.0)
        assert budget.pure

    @pytest.mark.parametrize("payload", [{"epsilon": 0.0}, {"epsilon": 1.0, "delta": 1.0}])
    def test_invalid_budget(self, payload: dict) -> None:
        """Test that ε <= 0 and δ >= 1 are rejected."""
        with pytest.raises(ValidationError):
            PrivacyBudget(**payload)

    def test_zero_scale_requires_non_private_flag(self) -> None:
        """Test that silent zero-noise runs are impossible."""
        with pytest.raises(ValidationError, match="non_private"):
            NoiseSpec(mechanism="gaussian", scale=0.0, rng_seed=0)

    def test_non_private_requires_zero_scale(self) -> None:
        """Test that the exact mode cannot carry noise."""
        with pytest.raises(ValidationError):
            NoiseSpec(mechanism="gaussian", scale=1.0, rng_seed=0, non_private=True)

    def test_seed_range(self) -> None:
        """Test that seeds must fit in 64 bits."""
        with pytest.raises(ValidationError):
            NoiseSpec(mechanism="laplace", scale=1.0, rng_seed=2**64)


@pytest.mark.unit
class TestCalibration:
    """Tests for the noise scales."""

    def test_sigma_formula(self) -> None:
        """Test σ = c·L·√(d·ln(1/δ))/(b·ε) in the ℓ1 setting."""
        sigma = sigma_noisy_md(2.0, 16, 1e-5, 10, 0.5, constant=1.0)
        assert sigma == pytest.approx(2.0 * math.sqrt(16 * math.log(1e5)) / 5.0)

    def test_sigma_general_geometry_uses_effective_dimension(self) -> None:
        """Test that q = 2 gives d_eff = d^0 = 1."""
        sigma = sigma_noisy_md(1.0, 100, 1e-5, 1, 1.0, q=2.0, constant=1.0)
        assert sigma == pytest.approx(math.sqrt(math.log(1e5)))

    def test_sigma_rejects_pure_dp(self) -> None:
        """Test that Gaussian noise needs δ > 0."""
        with pytest.raises(DomainError, match="delta"):
            sigma_noisy_md(1.0, 4, 0.0, 1, 1.0)

    def test_pure_fw_scale(self) -> None:
        """Test λ = 2·L·D·2^t/(b·ε)."""
        assert lambda_pure_fw(1.0, 2.0, 3, 64, 0.5) == pytest.approx(2.0 * 2.0 * 8 / 32.0)

    def test_pure_fw_names_violated_inequality(self) -> None:
        """Test that 2^t > b raises with the inequality in the message."""
        with pytest.raises(ParameterizationError, match=r"2\^t <= b"):
            lambda_pure_fw(1.0, 1.0, 5, 16, 1.0)

    def test_approx_fw_scale(self) -> None:
        """Test λ = L·D·2^{T/2}·ln(n/δ)/(b·ε)."""
        scale = lambda_approx_fw(1.0, 1.0, 2, 1000, 1e-4, 64, 0.1)
        assert scale == pytest.approx(2.0 * math.log(1000 / 1e-4) / 6.4)

    @pytest.mark.parametrize(
        ("T", "n", "delta", "epsilon", "match"),
        [
            (7, 1000, 1e-4, 0.1, r"2\^T <= b"),
            (2, 1000, 0.01, 0.1, "delta <= 1/n"),
            (2, 1000, 1e-4, 5.0, "epsilon <= sqrt"),
        ],
    )
    def test_approx_fw_preconditions(
        self, T: int, n: int, delta: float, epsilon: float, match: str
    ) -> None:
        """Test each violated precondition of the approximate-DP scale."""
        with pytest.raises(ParameterizationError, match=match):
            lambda_approx_fw(1.0, 1.0, T, n, delta, 64, epsilon)


@pytest.mark.unit
class TestMechanisms:
    """Tests for noise sources and report-noisy-max."""

    def test_zero_scale_argmin_is_exact(self) -> None:
        """Test that scale 0 returns the first minimizing index."""
        source = NoiseSource(seed=0)
        assert report_noisy_max([3.0, -1.0, -1.0, 2.0], 0.0, source) == 1
        assert source.draws["laplace"] == 0

    def test_noisy_argmin_is_reproducible(self) -> None:
        """Test that equal seeds give equal selections and count draws."""
        scores = np.zeros(10)
        first = NoiseSource(seed=9)
        second = NoiseSource(seed=9)
        picks = [report_noisy_max(scores, 1.0, first) for _ in range(5)]
        assert picks == [report_noisy_max(scores, 1.0, second) for _ in range(5)]
        assert first.draws["laplace"] == 50

    def test_large_gap_survives_small_noise(self) -> None:
        """Test that a clear minimum is selected under tiny noise."""
        source = NoiseSource(seed=1)
        assert report_noisy_max([0.0, 100.0, 100.0], 1e-3, source) == 0

    def test_empty_scores(self) -> None:
        """Test that at least one candidate is required."""
        with pytest.raises(DomainError):
            report_noisy_max([], 1.0, NoiseSource(seed=0))

    def test_gaussian_block_shape(self) -> None:
        """Test that Gaussian vectors come as a (d, count) block."""
        source = NoiseSource(seed=2)
        block = source.gaussian_vectors(7, 3, 0.5)
        assert block.shape == (3, 7)
        assert source.draws["gaussian"] == 7
        assert np.array_equal(source.gaussian_vectors(2, 3, 0.0), np.zeros((3, 2)))


@pytest.mark.unit
@pytest.mark.slow
class TestMechanismDistributions:
    """Million-draw moment and selection-probability checks."""

    DRAWS = 1_000_000

    def test_two_candidate_selection_probability(self) -> None:
        """Test P(pick the worse score) against the two-Laplace tail formula."""
        gap, scale = 1.0, 1.0
        source = NoiseSource(seed=11)

        picks = sum(report_noisy_max([0.0, gap], scale, source) for _ in range(self.DRAWS))

        # ζ0 - ζ1 > gap for i.i.d. Laplace(scale) ζ
        expected = 0.5 * math.exp(-gap / scale) * (1.0 + gap / (2.0 * scale))
        stderr = math.sqrt(expected * (1.0 - expected) / self.DRAWS)
        assert abs(picks / self.DRAWS - expected) <= 3.0 * stderr
        assert source.draws["laplace"] == 2 * self.DRAWS

    def test_gaussian_moments(self) -> None:
        """Test the Gaussian sampler's mean and variance at N = 10⁶."""
        sigma = 2.0

        draws = NoiseSource(seed=12).gaussian_vectors(self.DRAWS, 1, sigma).ravel()

        assert abs(draws.mean()) <= 4.0 * sigma / math.sqrt(self.DRAWS)
        assert draws.var() == pytest.approx(sigma**2, rel=0.05)

    def test_laplace_moments(self) -> None:
        """Test the Laplace sampler's mean and variance at N = 10⁶."""
        scale = 1.5
        std = math.sqrt(2.0) * scale

        draws = NoiseSource(seed=13).laplace(self.DRAWS, scale)

        assert abs(draws.mean()) <= 4.0 * std / math.sqrt(self.DRAWS)
        assert draws.var() == pytest.approx(std**2, rel=0.05)


@pytest.mark.unit
class TestComposition:
    """Tests for composition and amplification calculators."""

    def test_basic_composition(self) -> None:
        """Test k·ε."""
        assert compose_basic(4, 0.25) == pytest.approx(1.0)

    def test_advanced_composition(self) -> None:
        """Test the advanced composition formula."""
        epsilon, delta = compose_advanced(10, 0.1, 1e-6, 1e-5)
        expected = math.sqrt(20 * math.log(1e5)) * 0.1 + 10 * 0.1 * math.expm1(0.1)
        assert epsilon == pytest.approx(expected)
        assert delta == pytest.approx(1e-5 + 1e-5)

    def test_shuffle_amplification(self) -> None:
        """Test the advisory amplified ε for a permissible ε₀."""
        value = shuffle_amplified_epsilon(1.0, 100_000, 1e-6)
        assert value == pytest.approx(8.0 * math.sqrt(math.log(1e6) / 100_000))

    def test_shuffle_precondition(self) -> None:
        """Test that ε₀ above log(n/(16 log(2/δ))) is rejected."""
        with pytest.raises(ParameterizationError, match="epsilon0"):
            shuffle_amplified_epsilon(10.0, 1000, 1e-6)

    def test_subsampling_never_increases_epsilon(self) -> None:
        """Test amplification by subsampling."""
        epsilon, delta = subsample_amplified(1.0, 1e-6, 10, 100)
        assert epsilon == pytest.approx(math.log1p(0.1 * math.expm1(1.0)))
        assert epsilon < 1.0
        assert delta == pytest.approx(1e-7)

    def test_ledger_totals(self) -> None:
        """Test that the ledger sums entries by basic composition."""
        ledger = PrivacyLedger()
        ledger.add("phase_1", 0.5, 1e-6)
        ledger.add("phase_2", 0.25, 1e-6)
        summary = ledger.to_dict()
        assert summary["total_epsilon"] == pytest.approx(0.75)
        assert summary["total_delta"] == pytest.approx(2e-6)
        assert summary["composition"] == "basic"
