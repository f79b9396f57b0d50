"""Unit tests for the algorithm adapters and their registry."""

import pytest

from dp_sco_toolkit.adapters.base_adapter import AlgorithmAdapter
from dp_sco_toolkit.adapters.localized_md_adapter import LocalizedMdAdapter
from dp_sco_toolkit.adapters.noisy_md_adapter import (
    NoisyMdAdapter,
    default_batch_size,
    default_iterations,
)
from dp_sco_toolkit.adapters.registry import create_adapter
from dp_sco_toolkit.adapters.sc_wrapper_adapter import ScWrapperAdapter, strong_convexity
from dp_sco_toolkit.adapters.tree_fw_adapter import TreeFwAdapter
from dp_sco_toolkit.errors import DomainError
from dp_sco_toolkit.models.experiment_models import (
    AlgorithmOptions,
    GeometrySpec,
    InstanceSpec,
    RunSpec,
)
from dp_sco_toolkit.services.problem_service import Problem, build_problem


def make_problem(
    family: str = "quadratic", options: AlgorithmOptions | None = None, n: int = 512
) -> Problem:
    return build_problem(
        RunSpec(
            algorithm="noisy-md",
            instance=InstanceSpec(family=family),
            geometry=GeometrySpec(),
            options=options or AlgorithmOptions(),
            n=n,
            d=4,
            epsilon=1.0,
            delta=1e-6,
            seed=1,
            non_private=True,
        )
    )


@pytest.mark.unit
class TestRegistry:
    """Test suite for create_adapter."""

    @pytest.mark.parametrize(
        ("name", "adapter_type"),
        [
            ("noisy-md", NoisyMdAdapter),
            ("localized-md", LocalizedMdAdapter),
            ("tree-fw", TreeFwAdapter),
        ],
    )
    def test_lookup(self, name: str, adapter_type: type[AlgorithmAdapter]) -> None:
        """Test that names map to their adapters."""
        adapter = create_adapter(name)

        assert isinstance(adapter, adapter_type)
        assert adapter.algorithm_name == name

    def test_sc_wrapper_wraps_inner(self) -> None:
        """Test that the reduction wraps the named inner adapter."""
        adapter = create_adapter("sc-wrapper", "tree-fw")

        assert isinstance(adapter, ScWrapperAdapter)
        assert isinstance(adapter.inner, TreeFwAdapter)

    @pytest.mark.parametrize(
        ("name", "inner", "match"),
        [
            ("adam", None, "unknown algorithm"),
            ("sc-wrapper", None, "needs an inner"),
            ("sc-wrapper", "noisy-md", "cannot be used"),
        ],
    )
    def test_invalid(self, name: str, inner: str | None, match: str) -> None:
        """Test unknown names and non-reducible inners."""
        with pytest.raises(DomainError, match=match):
            create_adapter(name, inner)


@pytest.mark.unit
class TestAdapters:
    """Test suite for the adapter runs."""

    def test_noisy_md_defaults(self) -> None:
        """Test b = ⌊√n⌋ and T = ⌊n²/b²⌋."""
        assert default_batch_size(500) == 22
        assert default_iterations(500, 22) == 250_000 // 484

    def test_noisy_md_run(self) -> None:
        """Test that configured T and b reach the algorithm."""
        problem = make_problem(options=AlgorithmOptions(iterations=20, batch_size=4))

        run = NoisyMdAdapter().run(problem)

        assert run.grad_count == 80
        assert run.params["sigma"] == 0.0
        assert run.report["non_private"]

    def test_tree_fw_uses_configured_schedule(self) -> None:
        """Test that explicit phases and batch override the theory schedule."""
        problem = make_problem(options=AlgorithmOptions(phases=2, batch_size=8))

        run = TreeFwAdapter().run(problem)

        assert run.p == 1.0
        assert (run.params["phases"], run.params["batch_size"]) == (2, 8)
        assert run.grad_count == sum(phase["grad_count"] for phase in run.report["phases"])

    def test_tree_fw_theory_schedule(self) -> None:
        """Test the default schedule on the ℓ1 ball."""
        run = TreeFwAdapter().run(make_problem(n=2048))

        assert run.params["batch_size"] == 35
        assert run.grad_count <= 2048

    def test_localized_md_run(self) -> None:
        """Test a non-private localized run and its phase parameters."""
        run = LocalizedMdAdapter().run(make_problem(n=128))

        assert len(run.params["phases"]) == 7
        assert run.params["mode"] == "l1"
        assert run.grad_count == run.report["grad_count"]

    def test_strong_convexity_default(self) -> None:
        """Test μ = 2C²/3 for planted quadratics and the error otherwise."""
        assert strong_convexity(make_problem()) == pytest.approx(2.0 / 3.0)
        assert strong_convexity(make_problem(options=AlgorithmOptions(mu=0.1))) == 0.1
        with pytest.raises(DomainError, match="options.mu"):
            strong_convexity(make_problem("linear"))

    def test_bind_refuses_noisy_md(self) -> None:
        """Test that noisy mirror descent is not a reduction stage."""
        with pytest.raises(DomainError, match="cannot be used"):
            NoisyMdAdapter().bind(make_problem())
