"""Non-private high-accuracy solver for the empirical minimum."""

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from dp_sco_toolkit.geometry import Vector, dual_exponent, lp_norm, mirror_step
from dp_sco_toolkit.losses import empirical_loss
from dp_sco_toolkit.models.experiment_models import (
    DEFAULT_BASELINE_MAX_ITERATIONS,
    DEFAULT_BASELINE_TOLERANCE,
    RunSpec,
)
from dp_sco_toolkit.services.problem_service import Problem
from dp_sco_toolkit.settings import ToolkitSettings

logger = logging.getLogger(__name__)

STRONG_CONVEXITY_FLOOR = 0.25


@dataclass
class BaselineCertificate:
    """Convergence certificate of the empirical minimum.

    Attributes:
        value: Best F̂ found (exact for closed forms)
        gap: Frank-Wolfe duality gap at the best point; value - min F̂ <= gap
        iterations: Mirror descent iterations (0 for closed forms)
        converged: Whether the objective stalled below the tolerance
        method: "closed_form" or "mirror_descent"
    """

    value: float
    gap: float
    iterations: int
    converged: bool
    method: Literal["closed_form", "mirror_descent"]


def duality_gap(problem: Problem, x: Vector) -> float:
    """<∇F̂(x), x> + D·‖∇F̂(x)‖_q, the linearized suboptimality over the ball."""
    g = problem.loss.mean_gradient(x, problem.dataset)
    q = math.inf if problem.spec.geometry.norm == "l1" else dual_exponent(problem.p)
    return max(0.0, float(g @ x) + problem.D * lp_norm(g, q))


@dataclass(frozen=True)
class BaselineSolver:
    """Full-batch mirror descent with σ = 0, stopped when the objective stalls."""

    max_iterations: int = DEFAULT_BASELINE_MAX_ITERATIONS
    tolerance: float = DEFAULT_BASELINE_TOLERANCE

    @classmethod
    def from_settings(cls, settings: ToolkitSettings) -> "BaselineSolver":
        return cls(settings.baseline_max_iterations, settings.baseline_tolerance)

    @classmethod
    def from_spec(cls, spec: RunSpec) -> "BaselineSolver":
        return cls(spec.baseline_max_iterations, spec.baseline_tolerance)

    def solve(self, problem: Problem) -> BaselineCertificate:
        """min F̂ over the problem's constraint.

        Closed-form minima (linear and sign families) are returned directly.
        """
        if problem.empirical_minimum is not None:
            return BaselineCertificate(problem.empirical_minimum, 0.0, 0, True, "closed_form")

        beta = problem.loss.smoothness(problem.p if problem.general_geometry else 1.0, problem.dataset.d)
        x = problem.x0.copy()
        best_x = x
        best = empirical_loss(problem.loss, x, problem.dataset)
        converged = False
        k = 0
        for k in range(1, self.max_iterations + 1):
            if math.isfinite(beta) and beta > 0:
                eta = STRONG_CONVEXITY_FLOOR / beta
            else:
                eta = problem.D / (problem.lipschitz * math.sqrt(k))
            g = problem.loss.mean_gradient(x, problem.dataset)
            x = mirror_step(problem.geometry, problem.constraint, x, g, eta)
            value = empirical_loss(problem.loss, x, problem.dataset)
            improvement = best - value
            if value < best:
                best, best_x = value, x
            if 0.0 <= improvement < self.tolerance * max(1.0, abs(best)):
                converged = True
                break

        gap = duality_gap(problem, np.asarray(best_x))
        if not converged:
            logger.warning(
                "Baseline solver hit the iteration cap",
                extra={"iterations": k, "value": best, "gap": gap},
            )
        return BaselineCertificate(best, gap, k, converged, "mirror_descent")
