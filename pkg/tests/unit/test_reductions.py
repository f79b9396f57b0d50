"""Unit tests for the strongly convex reduction."""

from dataclasses import dataclass, field

import numpy as np
import pytest

from dp_sco_toolkit.algorithms import StageOutcome, sc_wrapper, stage_schedule
from dp_sco_toolkit.errors import DomainError, ParameterizationError
from dp_sco_toolkit.geometry import Vector
from dp_sco_toolkit.losses import Dataset
from dp_sco_toolkit.privacy import PrivacyBudget


@dataclass
class RecordingInner:
    """Stage algorithm that shifts its start by one and remembers its inputs."""

    name: str = "recording"
    supports_reduction: bool = True
    calls: list[tuple[np.ndarray, Vector, PrivacyBudget, int]] = field(default_factory=list)

    def run_stage(
        self, dataset: Dataset, x0: Vector, budget: PrivacyBudget, seed: int
    ) -> StageOutcome:
        self.calls.append((dataset.features[0].copy(), x0.copy(), budget, seed))
        return StageOutcome(x=x0 + 1.0, grad_count=2 * dataset.n, report={"seed": seed})


def _indexed_dataset(n: int) -> Dataset:
    """Dataset whose first feature row is the sample index."""
    return Dataset("linear", np.vstack([np.arange(n, dtype=float), np.zeros(n)]))


@pytest.mark.unit
class TestStageSchedule:
    """Tests for stage_schedule."""

    def test_sizes_for_1024(self) -> None:
        """Test k = ⌈log₂ log₂ n⌉ and n_i = ⌊2^{i-2}·n/log₂ n⌋."""
        schedule = stage_schedule(1024)
        assert schedule.k == 4
        assert schedule.sizes == (51, 102, 204, 409)
        assert schedule.total_samples <= 1024

    def test_smallest_feasible_n(self) -> None:
        """Test that n = 4 gives one stage of one sample."""
        assert stage_schedule(4).sizes == (1,)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_too_small(self, n: int) -> None:
        """Test that tiny samples raise ParameterizationError."""
        with pytest.raises(ParameterizationError):
            stage_schedule(n)


@pytest.mark.unit
class TestScWrapper:
    """Tests for sc_wrapper."""

    @pytest.fixture
    def budget(self) -> PrivacyBudget:
        """Create the per-stage budget."""
        return PrivacyBudget(epsilon=0.5, delta=1e-6)

    def test_stages_use_disjoint_slices(self, budget: PrivacyBudget) -> None:
        """Test that no sample is seen by two stages."""
        inner = RecordingInner()
        sc_wrapper(inner, _indexed_dataset(1024), 1.0, budget, np.zeros(2), seed=3)
        seen = np.concatenate([call[0] for call in inner.calls])
        assert [call[0].shape[0] for call in inner.calls] == [51, 102, 204, 409]
        assert np.unique(seen).shape[0] == seen.shape[0]

    def test_warm_starts_and_accounting(self, budget: PrivacyBudget) -> None:
        """Test warm starts, stage seeds, gradient totals and the ledger."""
        inner = RecordingInner()
        x, run = sc_wrapper(inner, _indexed_dataset(1024), 1.0, budget, np.zeros(2), seed=3)
        assert np.array_equal(x, np.full(2, 4.0))
        assert [call[1][0] for call in inner.calls] == [0.0, 1.0, 2.0, 3.0]
        assert [call[3] for call in inner.calls] == [3 * 1_000_003 + i for i in range(1, 5)]
        assert all(call[2] == budget for call in inner.calls)
        assert run.grad_count == 2 * 766
        assert run.ledger.total_epsilon == pytest.approx(2.0)
        summary = run.to_dict()
        assert summary["k"] == 4
        assert summary["stages"][1]["slice"] == [51, 153]

    def test_same_seed_same_slices(self, budget: PrivacyBudget) -> None:
        """Test that the shuffle is reproducible from the seed."""
        first, second = RecordingInner(), RecordingInner()
        sc_wrapper(first, _indexed_dataset(64), 1.0, budget, np.zeros(2), seed=8)
        sc_wrapper(second, _indexed_dataset(64), 1.0, budget, np.zeros(2), seed=8)
        for a, b in zip(first.calls, second.calls):
            assert np.array_equal(a[0], b[0])

    def test_inner_must_support_reduction(self, budget: PrivacyBudget) -> None:
        """Test that noisy mirror descent style inners are refused."""
        with pytest.raises(DomainError, match="cannot be used"):
            sc_wrapper(
                RecordingInner(name="noisy-md", supports_reduction=False),
                _indexed_dataset(64),
                1.0,
                budget,
                np.zeros(2),
            )

    def test_mu_must_be_positive(self, budget: PrivacyBudget) -> None:
        """Test that μ <= 0 is rejected."""
        with pytest.raises(DomainError, match="strong convexity"):
            sc_wrapper(RecordingInner(), _indexed_dataset(64), 0.0, budget, np.zeros(2))
