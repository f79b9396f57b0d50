"""Localized noisy mirror descent adapter."""

import logging

from dp_sco_toolkit.adapters.base_adapter import AdapterRun, AlgorithmAdapter
from dp_sco_toolkit.algorithms import (
    LocalizationMode,
    build_schedule,
    default_eta_l1,
    default_eta_lp,
    localized_md,
)
from dp_sco_toolkit.geometry import Vector
from dp_sco_toolkit.losses import Dataset
from dp_sco_toolkit.privacy import PrivacyBudget
from dp_sco_toolkit.services.problem_service import Problem

logger = logging.getLogger(__name__)


class LocalizedMdAdapter(AlgorithmAdapter):
    """ℓ1-mode or ℓp-mode localized mirror descent."""

    supports_reduction = True

    def __init__(self) -> None:
        super().__init__("localized-md")

    def run_on(
        self,
        problem: Problem,
        dataset: Dataset,
        x0: Vector | None,
        budget: PrivacyBudget,
        seed: int,
    ) -> AdapterRun:
        spec = problem.spec
        n, d = dataset.n, dataset.d
        mode = LocalizationMode.lp(problem.p) if problem.general_geometry else LocalizationMode.l1()
        eta = spec.options.step
        if eta is None:
            if problem.general_geometry:
                eta = default_eta_lp(
                    problem.D, problem.lipschitz, n, d, problem.p, budget.epsilon, budget.delta
                )
            else:
                eta = default_eta_l1(problem.D, problem.lipschitz, n, d, budget.epsilon, budget.delta)
        schedule = build_schedule(n, d, budget.epsilon, eta, problem.lipschitz, mode.exponent(d))
        sigma_constant = problem.spec.sigma_constant
        x, report = localized_md(
            dataset,
            problem.D,
            budget,
            problem.lipschitz,
            x0=x0,
            mode=mode,
            loss=problem.loss,
            constraint=problem.constraint,
            eta=eta,
            seed=seed,
            non_private=spec.non_private,
            sigma_constant=sigma_constant,
        )
        params = {
            "eta": eta,
            "p": schedule.p,
            "mode": mode.kind,
            "lipschitz": problem.lipschitz,
            "sigma_constant": sigma_constant,
            "phases": [
                {
                    "i": plan.i,
                    "epsilon": plan.epsilon,
                    "n": plan.n,
                    "eta": plan.eta,
                    "batch_size": plan.batch_size,
                    "iterations": plan.iterations,
                    "radius": plan.radius,
                }
                for plan in schedule.phases
            ],
        }
        return AdapterRun(
            x=x, grad_count=report.grad_count, p=schedule.p, params=params, report=report.to_dict()
        )
