"""Unit tests for the non-private baseline solver."""

import numpy as np
import pytest

from dp_sco_toolkit.losses import empirical_loss
from dp_sco_toolkit.models.experiment_models import GeometrySpec, InstanceSpec, RunSpec
from dp_sco_toolkit.services.baseline_service import BaselineSolver, duality_gap
from dp_sco_toolkit.services.problem_service import Problem, build_problem
from dp_sco_toolkit.settings import ToolkitSettings


def quadratic_problem(n: int = 200, d: int = 4) -> Problem:
    return build_problem(
        RunSpec(
            algorithm="noisy-md",
            instance=InstanceSpec(family="quadratic"),
            geometry=GeometrySpec(),
            n=n,
            d=d,
            epsilon=1.0,
            delta=1e-6,
            seed=2,
        )
    )


@pytest.mark.unit
class TestBaselineSolver:
    """Test suite for BaselineSolver."""

    def test_closed_form_is_used(self) -> None:
        """Test that the linear family skips the iterative solver."""
        problem = build_problem(
            RunSpec(
                algorithm="noisy-md",
                instance=InstanceSpec(family="linear"),
                geometry=GeometrySpec(),
                n=32,
                d=3,
                epsilon=1.0,
                delta=1e-6,
                seed=0,
            )
        )

        certificate = BaselineSolver().solve(problem)

        assert certificate.method == "closed_form"
        assert certificate.value == problem.empirical_minimum
        assert certificate.gap == 0.0

    def test_quadratic_solution_is_certified(self) -> None:
        """Test that the returned value is within the duality gap of any feasible point."""
        problem = quadratic_problem()

        certificate = BaselineSolver().solve(problem)

        assert certificate.method == "mirror_descent"
        assert certificate.gap >= 0.0
        assert certificate.value <= empirical_loss(problem.loss, problem.x0, problem.dataset)
        reference_value = empirical_loss(problem.loss, problem.population_reference, problem.dataset)
        assert certificate.value <= reference_value + certificate.gap + 1e-12

    def test_iteration_cap_from_settings(self) -> None:
        """Test that settings bound the solver's iterations."""
        solver = BaselineSolver.from_settings(ToolkitSettings(baseline_max_iterations=5))

        certificate = solver.solve(quadratic_problem())

        assert solver.max_iterations == 5
        assert certificate.iterations <= 5

    def test_duality_gap_is_non_negative(self) -> None:
        """Test that the gap is non-negative at feasible points."""
        problem = quadratic_problem()
        rng = np.random.default_rng(0)
        for _ in range(5):
            x = rng.uniform(-0.2, 0.2, problem.dataset.d)
            assert duality_gap(problem, x) >= 0.0
