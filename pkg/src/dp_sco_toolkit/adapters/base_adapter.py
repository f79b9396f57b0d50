"""Base adapter for the benchmarked algorithms.

Every algorithm the benchmark can run sits behind an AlgorithmAdapter that
derives its schedule from a Problem, runs it, and returns the output point
with the schedule values needed to reproduce the run. Toolkit errors are left
to bubble up; the benchmark service records them as failed runs.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any

from dp_sco_toolkit.algorithms import StageOutcome
from dp_sco_toolkit.errors import DomainError
from dp_sco_toolkit.geometry import Vector
from dp_sco_toolkit.losses import Dataset
from dp_sco_toolkit.privacy import PrivacyBudget
from dp_sco_toolkit.services.problem_service import Problem


@dataclass
class AdapterRun:
    """Output of one adapter run.

    Attributes:
        x: Output point
        grad_count: Per-sample gradient evaluations
        p: Norm exponent used by the algorithm
        params: Derived schedule values (batch sizes, steps, noise scales)
        report: Algorithm report, JSON-serializable
    """

    x: Vector
    grad_count: int
    p: float
    params: dict[str, Any] = field(default_factory=dict)
    report: dict[str, Any] = field(default_factory=dict)


class AlgorithmAdapter(ABC):
    """Abstract base class for algorithm adapters.

    Subclasses implement ``run_on``, which runs the algorithm on an arbitrary
    slice of the problem's data from an arbitrary start. ``run`` applies it to
    the whole dataset; ``bind`` exposes it as a stage of the strongly convex
    reduction.
    """

    supports_reduction = False

    def __init__(self, algorithm_name: str) -> None:
        """Initialize the adapter.

        Args:
            algorithm_name: Name used in records and metrics (e.g. 'noisy-md')
        """
        self.algorithm_name = algorithm_name

    @abstractmethod
    def run_on(
        self,
        problem: Problem,
        dataset: Dataset,
        x0: Vector | None,
        budget: PrivacyBudget,
        seed: int,
    ) -> AdapterRun:
        """Run the algorithm on ``dataset`` with the problem's loss and constraint.

        Args:
            problem: Problem supplying loss, constraint and constants
            dataset: Samples to use (the full dataset or a stage slice)
            x0: Starting point, or None for the algorithm's default
            budget: Privacy budget of this run
            seed: Seed of every random stream of this run

        Returns:
            AdapterRun with the output point and schedule values
        """
        pass

    def initial_point(self, problem: Problem) -> Vector | None:
        return problem.x0

    def run(self, problem: Problem) -> AdapterRun:
        """Run on the full dataset with the RunSpec's budget and seed."""
        spec = problem.spec
        budget = PrivacyBudget(epsilon=spec.epsilon, delta=spec.delta)
        return self.run_on(problem, problem.dataset, self.initial_point(problem), budget, spec.seed)

    def bind(self, problem: Problem) -> "BoundStage":
        """Stage runner for the strongly convex reduction.

        Raises:
            DomainError: If the algorithm cannot serve as a stage
        """
        if not self.supports_reduction:
            raise DomainError(f"{self.algorithm_name} cannot be used inside sc-wrapper")
        return BoundStage(self, problem)


@dataclass
class BoundStage:
    """An adapter bound to a problem, usable as a reduction stage."""

    adapter: AlgorithmAdapter
    problem: Problem

    @property
    def name(self) -> str:
        return self.adapter.algorithm_name

    @property
    def supports_reduction(self) -> bool:
        return self.adapter.supports_reduction

    def run_stage(
        self, dataset: Dataset, x0: Vector, budget: PrivacyBudget, seed: int
    ) -> StageOutcome:
        run = self.adapter.run_on(self.problem, dataset, x0, budget, seed)
        return StageOutcome(
            x=run.x, grad_count=run.grad_count, report={"params": run.params, "report": run.report}
        )
