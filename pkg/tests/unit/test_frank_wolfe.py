"""Unit tests for dyadic-tree private Frank-Wolfe."""

import math

import numpy as np
import pytest

from dp_sco_toolkit.algorithms import (
    FwConfig,
    TreeAddress,
    default_T_approx,
    default_T_pure,
    dfs_order,
    fw_step_size,
    leaf_index,
    phase_fresh_samples,
    phase_gradient_count,
    private_vr_fw,
    pure_fw_schedule,
    score_sensitivity,
    variance_probe,
)
from dp_sco_toolkit.errors import (
    DomainError,
    FallbackRequired,
    ParameterizationError,
    PreconditionError,
    SampleExhaustionError,
)
from dp_sco_toolkit.geometry import L1Ball, lp_norm
from dp_sco_toolkit.losses import DataPoint, Dataset, QuadraticLoss, gen_quadratic_instance


def _config(T: int, b: int, d: int, **flags: object) -> FwConfig:
    loss = QuadraticLoss(1.0, 1.0)
    fields: dict = {
        "constraint": L1Ball(d, 1.0),
        "loss": loss,
        "phases": T,
        "batch_size": b,
        "epsilon": 1.0,
        "lipschitz": loss.lipschitz(1.0, d),
        "radius": 1.0,
        "seed": 5,
    }
    fields.update(flags)
    return FwConfig(**fields)


@pytest.mark.unit
class TestTreeAddressing:
    """Tests for tree addresses, traversal and step sizes."""

    def test_dfs_order_is_preorder(self) -> None:
        """Test the pre-order of the 2^{t+1} - 2 non-root vertices."""
        assert dfs_order(2) == ["0", "00", "01", "1", "10", "11"]
        assert len(dfs_order(4)) == 2**5 - 2

    def test_leaf_index_is_binary_value(self) -> None:
        """Test ℓ(s) as the integer with binary representation s."""
        assert leaf_index("101") == 5
        assert leaf_index("000") == 0
        with pytest.raises(DomainError):
            leaf_index("")

    def test_step_size(self) -> None:
        """Test η_{t,s} = 2/(2^{t-1} + ℓ(s) + 1)."""
        assert fw_step_size(3, "101") == pytest.approx(2.0 / 10.0)
        assert fw_step_size(1, "0") == pytest.approx(1.0)

    def test_step_size_needs_a_leaf(self) -> None:
        """Test that internal vertices have no step index."""
        with pytest.raises(DomainError, match="leaf"):
            fw_step_size(3, "10")

    @pytest.mark.parametrize(("t", "s"), [(0, ""), (2, "012"), (2, "2")])
    def test_invalid_addresses(self, t: int, s: str) -> None:
        """Test that malformed addresses are rejected."""
        with pytest.raises(DomainError):
            TreeAddress(t, s)

    def test_address_relations(self) -> None:
        """Test parent, depth and right-child flags."""
        address = TreeAddress(3, "01")
        assert address.parent == TreeAddress(3, "0")
        assert address.depth == 2
        assert address.is_right
        assert not address.is_leaf


@pytest.mark.unit
class TestSampleLedger:
    """Tests for the fresh-sample and gradient ledgers."""

    def test_phase_fresh_samples(self) -> None:
        """Test b + Σ_j 2^{j-1}·⌊2^{-j}b⌋."""
        assert phase_fresh_samples(1, 64) == 96
        assert phase_fresh_samples(2, 64) == 128
        assert phase_gradient_count(2, 64) == 2 * 128 - 64

    def test_run_ledger_matches_formula(self) -> None:
        """Test per-phase fresh samples, leaves and the overall sample budget."""
        T, b, d = 4, 64, 8
        data = gen_quadratic_instance(T * T * b, d, 1.0, 1.0, seed=1)
        _, report = private_vr_fw(data, _config(T, b, d, n=data.n))
        for t, phase in enumerate(report.phases, start=1):
            assert phase.fresh_samples == phase_fresh_samples(t, b)
            assert phase.grad_count == phase_gradient_count(t, b)
            assert phase.leaves == 2**t
        assert report.fresh_samples <= T * T * b
        assert report.max_drift_ratio <= 1.0

    def test_exhaustion_is_reported(self) -> None:
        """Test that a tree larger than the dataset raises SampleExhaustionError."""
        data = gen_quadratic_instance(20, 3, 1.0, 1.0, seed=0)
        with pytest.raises(SampleExhaustionError, match="dataset holds 20"):
            private_vr_fw(data, _config(2, 8, 3))

    def test_batch_must_cover_tree_depth(self) -> None:
        """Test that 2^T <= b is required."""
        with pytest.raises(ParameterizationError, match=r"2\^T <= b"):
            _config(4, 8, 3)

    def test_approx_mode_needs_n(self) -> None:
        """Test that approximate DP needs the dataset size."""
        with pytest.raises(ParameterizationError, match="dataset size"):
            _config(1, 8, 3, noise_mode="approx", delta=1e-6)


@pytest.mark.unit
class TestPrivateVrFw:
    """Tests for private_vr_fw."""

    def test_full_batch_estimates_telescope(self) -> None:
        """Test v_{t,s} = ∇F̂(x_{t,s}) at every vertex in full-batch exact mode."""
        data = gen_quadratic_instance(200, 5, 1.0, 1.0, seed=3)
        config = _config(3, 8, 5, full_batch=True, record_vertices=True, non_private=True)
        _, report = private_vr_fw(data, config)
        assert len(report.vertices) == sum(2 ** (t + 1) - 1 for t in range(1, 4))
        for rec in report.vertices:
            exact = config.loss.mean_gradient(rec.x, data)
            assert lp_norm(rec.v - exact, math.inf) <= 1e-12

    def test_iterates_stay_in_the_hull(self) -> None:
        """Test that every iterate is a convex combination of vertices."""
        data = gen_quadratic_instance(400, 6, 1.0, 1.0, seed=2)
        _, report = private_vr_fw(data, _config(3, 16, 6, record_vertices=True))
        assert all(lp_norm(rec.x, 1.0) <= 1.0 + 1e-12 for rec in report.vertices)

    def test_same_seed_same_output(self) -> None:
        """Test reproducibility of the noisy selections."""
        data = gen_quadratic_instance(300, 4, 1.0, 1.0, seed=8)
        first, first_report = private_vr_fw(data, _config(2, 16, 4))
        second, second_report = private_vr_fw(data, _config(2, 16, 4))
        assert np.array_equal(first, second)
        assert first_report.selections == second_report.selections

    def test_infeasible_start(self) -> None:
        """Test that x0 outside the hull is rejected."""
        data = gen_quadratic_instance(100, 3, 1.0, 1.0, seed=0)
        with pytest.raises(PreconditionError, match="hull"):
            private_vr_fw(data, _config(1, 8, 3), x0=np.array([1.0, 1.0, 0.0]))

    def test_score_sensitivity_bounds_hold(self) -> None:
        """Test the per-slice score bound for swaps at the root and at a right child."""
        data = gen_quadratic_instance(300, 4, 1.0, 1.0, seed=4)
        config = _config(3, 16, 4)
        swap = DataPoint(z=np.array([1.0, -1.0, 1.0, -1.0]), b=1.0)
        for s in ("", "1", "01"):
            checks = score_sensitivity(data, config, 2, s, 0, swap, 2.0 * config.lipschitz)
            assert checks
            assert all(check.holds for check in checks)

    def test_score_sensitivity_bound_constants(self) -> None:
        """Test bound = range·D/|S| at the root and 2·range·D/|S| at a right child."""
        data = gen_quadratic_instance(300, 4, 1.0, 1.0, seed=4)
        config = _config(3, 16, 4)
        swap = DataPoint(z=np.array([1.0, -1.0, 1.0, -1.0]), b=1.0)
        gradient_range = 2.0 * config.lipschitz

        root = score_sensitivity(data, config, 2, "", 0, swap, gradient_range)
        child = score_sensitivity(data, config, 2, "1", 0, swap, gradient_range)

        assert root and all(check.bound == pytest.approx(gradient_range / 16) for check in root)
        assert child and all(check.bound == pytest.approx(2.0 * gradient_range / 8) for check in child)
        assert child[0].bound == pytest.approx(4.0 * config.lipschitz * config.radius / 8)

    def test_score_sensitivity_needs_a_fresh_slice(self) -> None:
        """Test that left children (which copy their parent) are rejected."""
        data = gen_quadratic_instance(300, 4, 1.0, 1.0, seed=4)
        with pytest.raises(DomainError, match="no fresh slice"):
            score_sensitivity(data, _config(2, 8, 4), 2, "0", 0, DataPoint(z=np.zeros(4), b=0.0), 8.0)

    def test_variance_probe_needs_recorded_vertices(self) -> None:
        """Test that the probe refuses runs without recorded iterates."""
        data = gen_quadratic_instance(100, 3, 1.0, 1.0, seed=0)
        _, report = private_vr_fw(data, _config(1, 8, 3, record_vertices=True))
        errors = variance_probe(report, lambda x: np.zeros(3))
        assert set(errors) == {(1, ""), (1, "0"), (1, "1")}
        _, bare = private_vr_fw(data, _config(1, 8, 3))
        assert bare.vertices == []

    def test_empty_dataset(self) -> None:
        """Test that an empty sample is rejected."""
        with pytest.raises(DomainError, match="non-empty"):
            private_vr_fw(Dataset("quadratic", np.zeros((3, 0)), np.zeros(0)), _config(1, 8, 3))


@pytest.mark.unit
class TestSchedules:
    """Tests for the theory-default phase counts and schedules."""

    def test_pure_T_formula(self) -> None:
        """Test T = ⌊½·log₂(b·ε·β·D/(L·ln m))⌋ with the clamp."""
        argument = 1024 * 100.0 * 2.0 / (4.0 * math.log(16))
        expected = min(math.floor(0.5 * math.log2(argument)), 10)
        assert default_T_pure(1024, 100.0, 2.0, 1.0, 4.0, 16) == expected

    def test_T_is_at_least_one(self) -> None:
        """Test the lower clamp for a small argument above 1."""
        assert default_T_pure(64, 1.0, 2.0, 1.0, 4.0, 16) == 1
        assert default_T_approx(1000, 1.0, 2.0, 1.0, 4.0, 100_000, 16, 1e-6) == 1

    def test_non_smooth_needs_fallback(self) -> None:
        """Test that β = 0 is below the tree regime."""
        with pytest.raises(FallbackRequired, match="use T = 1"):
            default_T_pure(64, 1.0, 0.0, 1.0, 4.0, 16)

    def test_schedule_fits_sample(self) -> None:
        """Test that the pure schedule's trees fit in n and count ≤ n gradients."""
        schedule = pure_fw_schedule(4096, 100.0, 2.0, 1.0, 4.0, 16)
        assert schedule.batch_size == math.floor(4096 / math.log(4096) ** 2)
        total = sum(phase_fresh_samples(t, schedule.batch_size) for t in range(1, schedule.phases + 1))
        grads = sum(phase_gradient_count(t, schedule.batch_size) for t in range(1, schedule.phases + 1))
        assert total <= 4096
        assert grads <= 4096

    def test_fallback_schedule(self) -> None:
        """Test T = 1 and b = ⌊2n/3⌋ when smoothness is below range."""
        schedule = pure_fw_schedule(4096, 1.0, 0.0, 1.0, 4.0, 16)
        assert schedule.fallback
        assert (schedule.phases, schedule.batch_size) == (1, 2730)
        assert phase_fresh_samples(1, schedule.batch_size) <= 4096

    def test_tiny_sample_is_rejected(self) -> None:
        """Test that n < 3 has no schedule."""
        with pytest.raises(ParameterizationError):
            pure_fw_schedule(2, 1.0, 2.0, 1.0, 4.0, 4)
