"""Tree Frank-Wolfe adapter."""

import logging

from dp_sco_toolkit.adapters.base_adapter import AdapterRun, AlgorithmAdapter
from dp_sco_toolkit.algorithms import (
    FwConfig,
    FwSchedule,
    approx_fw_schedule,
    private_vr_fw,
    pure_fw_schedule,
)
from dp_sco_toolkit.geometry import Vector
from dp_sco_toolkit.losses import Dataset
from dp_sco_toolkit.privacy import PrivacyBudget
from dp_sco_toolkit.services.problem_service import Problem

logger = logging.getLogger(__name__)


class TreeFwAdapter(AlgorithmAdapter):
    """Pure-DP or approximate-DP tree Frank-Wolfe over the ℓ1 ball's vertices."""

    supports_reduction = True

    def __init__(self) -> None:
        super().__init__("tree-fw")

    def initial_point(self, problem: Problem) -> Vector | None:
        return None

    def schedule(self, problem: Problem, n: int, budget: PrivacyBudget) -> FwSchedule:
        """Configured (T, b) if both are given, otherwise the theory schedule."""
        options = problem.spec.options
        if options.phases is not None and options.batch_size is not None:
            return FwSchedule(phases=options.phases, batch_size=options.batch_size, fallback=False)
        m = problem.constraint.vertices().shape[0]
        if options.fw_mode == "approx":
            return approx_fw_schedule(
                n, budget.epsilon, problem.smoothness, problem.D, problem.lipschitz_inf, m, budget.delta
            )
        return pure_fw_schedule(
            n, budget.epsilon, problem.smoothness, problem.D, problem.lipschitz_inf, m
        )

    def run_on(
        self,
        problem: Problem,
        dataset: Dataset,
        x0: Vector | None,
        budget: PrivacyBudget,
        seed: int,
    ) -> AdapterRun:
        spec = problem.spec
        schedule = self.schedule(problem, dataset.n, budget)
        config = FwConfig(
            constraint=problem.constraint,
            loss=problem.loss,
            phases=schedule.phases,
            batch_size=schedule.batch_size,
            epsilon=budget.epsilon,
            lipschitz=problem.lipschitz_inf,
            radius=problem.D,
            noise_mode=spec.options.fw_mode,
            delta=budget.delta,
            n=dataset.n,
            seed=seed,
            non_private=spec.non_private,
        )
        x, report = private_vr_fw(dataset, config, x0)
        params = {
            "phases": schedule.phases,
            "batch_size": schedule.batch_size,
            "fallback": schedule.fallback,
            "noise_mode": spec.options.fw_mode,
            "laplace_scales": [phase.laplace_scale for phase in report.phases],
            "lipschitz": problem.lipschitz_inf,
            "smoothness": problem.smoothness,
            "p": 1.0,
        }
        return AdapterRun(x=x, grad_count=report.grad_count, p=1.0, params=params, report=report.to_dict())
