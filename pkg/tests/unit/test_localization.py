"""Unit tests for localized noisy mirror descent."""

import math

import numpy as np
import pytest

from dp_sco_toolkit.algorithms import (
    LocalizationMode,
    build_schedule,
    default_eta_l1,
    default_eta_lp,
    localized_md,
)
from dp_sco_toolkit.errors import DomainError, ParameterizationError, PreconditionError
from dp_sco_toolkit.geometry import L1Ball, l1_proxy_exponent, lp_norm
from dp_sco_toolkit.losses import QuadraticLoss, gen_quadratic_instance
from dp_sco_toolkit.privacy import PrivacyBudget


@pytest.mark.unit
class TestBuildSchedule:
    """Tests for the phase schedule."""

    def test_first_phase_parameters(self) -> None:
        """Test the rounded n_i, ε_i, η_i, b_i, T_i and radius of phase 1."""
        p = l1_proxy_exponent(16)
        schedule = build_schedule(1024, 16, 1.0, 0.01, 4.0, p)
        first = schedule.phases[0]
        assert schedule.k == 10
        assert first.n == 512
        assert first.epsilon == pytest.approx(0.5)
        assert first.eta == pytest.approx(0.01 / 16)
        assert first.batch_size == math.ceil(math.sqrt(512 / math.log(16)))
        assert first.iterations == 512 * 512 // first.batch_size**2
        assert first.radius == pytest.approx(2 * 4.0 * (0.01 / 16) * 512 * (p - 1))

    def test_phases_fit_in_the_sample(self) -> None:
        """Test Σ n_i <= n for sizes that are not powers of two."""
        for n in (2, 3, 5, 100, 1025):
            schedule = build_schedule(n, 4, 1.0, 0.1, 1.0, 1.5)
            assert schedule.total_samples <= n
            assert all(phase.n >= 1 and phase.iterations >= 1 for phase in schedule.phases)

    def test_single_sample_is_rejected(self) -> None:
        """Test that n = 1 cannot be localized."""
        with pytest.raises(ParameterizationError, match="n >= 2"):
            build_schedule(1, 4, 1.0, 0.1, 1.0, 1.5)

    def test_budget_halves_per_phase(self) -> None:
        """Test ε_i = 2^{-i}·ε."""
        schedule = build_schedule(64, 4, 2.0, 0.1, 1.0, 1.5)
        assert [phase.epsilon for phase in schedule.phases] == [2.0 * 2.0**-i for i in range(1, 7)]


@pytest.mark.unit
class TestLocalizedMd:
    """Tests for localized_md."""

    @pytest.fixture
    def budget(self) -> PrivacyBudget:
        """Create the overall (ε, δ) budget."""
        return PrivacyBudget(epsilon=1.0, delta=1e-6)

    def test_non_private_run_report(self, budget: PrivacyBudget) -> None:
        """Test iterates, disjoint slices, ledger and feasibility of a run."""
        data = gen_quadratic_instance(256, 4, C=1.0, D=1.0, seed=2)
        loss = QuadraticLoss(1.0, 1.0)
        L = loss.lipschitz(1.0, 4)
        reference = np.array([0.1, 0.0, -0.1, 0.05])
        x, report = localized_md(
            data, 1.0, budget, L, loss=loss, eta=0.05, seed=4, non_private=True, reference=reference
        )
        assert len(report.iterates) == len(report.phases) + 1 == 9
        assert lp_norm(x, 1.0) <= 1.0 + 1e-8
        starts = [phase.slice_start for phase in report.phases]
        stops = [phase.slice_stop for phase in report.phases]
        assert starts[0] == 0
        assert starts[1:] == stops[:-1]
        assert stops[-1] <= 256
        assert report.ledger.total_epsilon == pytest.approx(1.0 - 2.0**-8)
        assert report.ledger.non_private
        assert all(phase.distance_to_reference is not None for phase in report.phases)
        assert report.grad_count == sum(p.batch_size * p.iterations for p in report.phases)
        assert report.grad_count <= report.gradient_ceiling(256, 4, 1.0)

    def test_each_phase_respects_its_ball(self, budget: PrivacyBudget) -> None:
        """Test ‖x_i - x_{i-1}‖_p <= radius_i."""
        data = gen_quadratic_instance(128, 4, C=1.0, D=1.0, seed=3)
        loss = QuadraticLoss(1.0, 1.0)
        _, report = localized_md(data, 1.0, budget, 4.0, loss=loss, eta=0.05, seed=1, non_private=True)
        for phase, before, after in zip(report.phases, report.iterates, report.iterates[1:]):
            assert lp_norm(after - before, report.p) <= phase.radius * (1 + 1e-6) + 1e-10

    def test_same_seed_same_output(self, budget: PrivacyBudget) -> None:
        """Test reproducibility of private runs."""
        data = gen_quadratic_instance(64, 3, C=1.0, D=1.0, seed=5)
        loss = QuadraticLoss(1.0, 1.0)
        first, _ = localized_md(data, 1.0, budget, 4.0, loss=loss, seed=9)
        second, _ = localized_md(data, 1.0, budget, 4.0, loss=loss, seed=9)
        assert np.array_equal(first, second)

    def test_lp_mode_uses_configured_exponent(self, budget: PrivacyBudget) -> None:
        """Test that ℓp mode runs on the ℓp ball with the given p."""
        data = gen_quadratic_instance(32, 3, C=1.0, D=1.0, seed=6)
        loss = QuadraticLoss(1.0, 1.0)
        x, report = localized_md(
            data, 1.0, budget, 4.0, mode=LocalizationMode.lp(1.5), loss=loss, non_private=True
        )
        assert report.p == 1.5
        assert lp_norm(x, 1.5) <= 1.0 + 1e-8

    def test_infeasible_start(self, budget: PrivacyBudget) -> None:
        """Test that x0 outside the constraint is rejected."""
        data = gen_quadratic_instance(16, 2, C=1.0, D=1.0, seed=0)
        with pytest.raises(PreconditionError):
            localized_md(
                data,
                1.0,
                budget,
                4.0,
                x0=np.array([2.0, 0.0]),
                loss=QuadraticLoss(1.0, 1.0),
                constraint=L1Ball(2, 1.0),
            )


@pytest.mark.unit
class TestDefaults:
    """Tests for the default step sizes and modes."""

    def test_eta_l1_formula(self) -> None:
        """Test (D/L)·min(√(ln d/n), ε/√(d·ln d·ln(1/δ)))."""
        eta = default_eta_l1(2.0, 4.0, 100, 50, 1.0, 1e-6)
        log_d = math.log(50)
        expected = 0.5 * min(math.sqrt(log_d / 100), 1.0 / math.sqrt(50 * log_d * math.log(1e6)))
        assert eta == pytest.approx(expected)

    def test_eta_lp_formula_at_p_two(self) -> None:
        """Test that p = 2 drops the ln d factor."""
        eta = default_eta_lp(1.0, 1.0, 100, 10, 2.0, 100.0, 1e-6)
        assert eta == pytest.approx(min(0.1, 100.0 / math.sqrt(10 * math.log(1e6))))

    def test_eta_lp_rejects_p_out_of_range(self) -> None:
        """Test that p must lie in (1, 2]."""
        with pytest.raises(DomainError):
            default_eta_lp(1.0, 1.0, 100, 10, 3.0, 1.0, 1e-6)

    def test_lp_mode_validation(self) -> None:
        """Test that ℓp mode needs 1 < p <= 2."""
        with pytest.raises(DomainError):
            LocalizationMode.lp(2.5)
        assert LocalizationMode.l1().exponent(100) == pytest.approx(l1_proxy_exponent(100))
