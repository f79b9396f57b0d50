"""Strongly convex reduction adapter around a convex-case adapter."""

import logging

from dp_sco_toolkit.adapters.base_adapter import AdapterRun, AlgorithmAdapter
from dp_sco_toolkit.algorithms import sc_wrapper, stage_schedule
from dp_sco_toolkit.errors import DomainError
from dp_sco_toolkit.geometry import Vector
from dp_sco_toolkit.losses import Dataset, QuadraticDistribution
from dp_sco_toolkit.privacy import PrivacyBudget
from dp_sco_toolkit.services.problem_service import Problem

logger = logging.getLogger(__name__)


def strong_convexity(problem: Problem) -> float:
    """Configured μ, or 2C²/3 for planted quadratics."""
    mu = problem.spec.options.mu
    if mu is not None:
        return mu
    if isinstance(problem.distribution, QuadraticDistribution):
        return 2.0 * problem.distribution.C**2 / 3.0
    raise DomainError("sc-wrapper needs options.mu for this loss family")


class ScWrapperAdapter(AlgorithmAdapter):
    """Runs the inner adapter in ⌈log₂ log₂ n⌉ warm-started stages."""

    def __init__(self, inner: AlgorithmAdapter) -> None:
        super().__init__("sc-wrapper")
        self.inner = inner

    def run_on(
        self,
        problem: Problem,
        dataset: Dataset,
        x0: Vector | None,
        budget: PrivacyBudget,
        seed: int,
    ) -> AdapterRun:
        mu = strong_convexity(problem)
        start = problem.x0 if x0 is None else x0
        x, run = sc_wrapper(self.inner.bind(problem), dataset, mu, budget, start, seed=seed)
        params = {
            "inner": self.inner.algorithm_name,
            "mu": mu,
            "stage_sizes": list(stage_schedule(dataset.n).sizes),
            "stage_params": [stage["params"] for stage in run.stage_reports],
        }
        p = float(run.stage_reports[-1]["params"].get("p", problem.p))
        return AdapterRun(x=x, grad_count=run.grad_count, p=p, params=params, report=run.to_dict())
