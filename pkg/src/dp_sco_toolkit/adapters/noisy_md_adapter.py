"""Noisy mirror descent adapter."""

import logging
import math

from dp_sco_toolkit.adapters.base_adapter import AdapterRun, AlgorithmAdapter
from dp_sco_toolkit.algorithms import (
    ConstantStep,
    MdConfig,
    calibrated_noise,
    default_step_convex,
    noisy_md,
)
from dp_sco_toolkit.geometry import Vector
from dp_sco_toolkit.losses import Dataset
from dp_sco_toolkit.privacy import PrivacyBudget
from dp_sco_toolkit.services.problem_service import Problem

logger = logging.getLogger(__name__)


def default_batch_size(n: int) -> int:
    """b = ⌊√n⌋, so T = n²/b² is about n."""
    return max(1, math.isqrt(n))


def default_iterations(n: int, b: int) -> int:
    """T = ⌊n²/b²⌋."""
    return max(1, (n * n) // (b * b))


class NoisyMdAdapter(AlgorithmAdapter):
    """Convex-mode noisy mirror descent with the theory-default schedule."""

    def __init__(self) -> None:
        super().__init__("noisy-md")

    def run_on(
        self,
        problem: Problem,
        dataset: Dataset,
        x0: Vector | None,
        budget: PrivacyBudget,
        seed: int,
    ) -> AdapterRun:
        options = problem.spec.options
        n, d = dataset.n, dataset.d
        b = options.batch_size or default_batch_size(n)
        T = options.iterations or default_iterations(n, b)
        q = problem.q if problem.general_geometry else math.inf
        sigma_constant = problem.spec.sigma_constant
        noise = calibrated_noise(
            problem.lipschitz,
            d,
            b,
            budget,
            seed,
            q=q,
            sigma_constant=sigma_constant,
            non_private=problem.spec.non_private,
        )
        eta = options.step or default_step_convex(problem.D, problem.lipschitz, noise.scale, d, T, q)
        config = MdConfig(
            geometry=problem.geometry,
            constraint=problem.constraint,
            loss=problem.loss,
            batch_size=b,
            iterations=T,
            step=ConstantStep(eta),
            noise=noise,
            budget=budget,
            lipschitz=problem.lipschitz,
            general_geometry=problem.general_geometry,
            sigma_constant=sigma_constant,
        )
        result = noisy_md(dataset, config, x0=x0)
        params = {
            "batch_size": b,
            "iterations": T,
            "eta": eta,
            "sigma": noise.scale,
            "p": problem.p,
            "lipschitz": problem.lipschitz,
            "sigma_constant": sigma_constant,
        }
        return AdapterRun(
            x=result.x_out, grad_count=result.grad_count, p=problem.p, params=params, report=result.summary()
        )
