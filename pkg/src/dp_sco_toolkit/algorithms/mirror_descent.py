"""Noisy stochastic mirror descent in convex and relatively strongly convex modes."""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike

from dp_sco_toolkit.errors import DomainError, PreconditionError
from dp_sco_toolkit.geometry import (
    FEASIBILITY_TOL,
    ConstraintSet,
    LpGeometry,
    Vector,
    as_vector,
    log_dimension,
    mirror_step,
)
from dp_sco_toolkit.losses import Dataset, LossFamily, empirical_loss, spawn_rngs
from dp_sco_toolkit.observability import traced
from dp_sco_toolkit.observability.metrics import record_gradients
from dp_sco_toolkit.privacy import (
    DEFAULT_SIGMA_CONSTANT,
    NoiseSource,
    NoiseSpec,
    PrivacyBudget,
    sigma_noisy_md,
)

logger = logging.getLogger(__name__)

MAX_TRACE_POINTS = 1000
SIGMA_MATCH_RTOL = 1e-9


@dataclass(frozen=True)
class ConstantStep:
    """η_k = eta for every iteration."""

    eta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.eta) and self.eta > 0):
            raise DomainError(f"step size must be positive and finite, got {self.eta}")

    def at(self, k: int) -> float:
        return self.eta


@dataclass(frozen=True)
class StronglyConvexStep:
    """η_k = 2/(μ(k+1)) for a μ-relatively strongly convex objective."""

    mu: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise DomainError(f"strong convexity must be positive, got {self.mu}")

    def at(self, k: int) -> float:
        return default_step_sc(self.mu, k)


StepSchedule = ConstantStep | StronglyConvexStep


@dataclass(frozen=True, eq=False)
class MdConfig:
    """Configuration of one noisy mirror descent run.

    Attributes:
        geometry: Mirror map
        constraint: Feasible set
        loss: Loss family whose batch gradients are averaged
        batch_size: Samples per iteration b
        iterations: Number of iterations T
        step: Step schedule
        noise: Gaussian noise spec (σ per sample)
        budget: Declared privacy budget, None only in non-private mode
        lipschitz: L used to calibrate σ
        averaging: "uniform" or "weighted" (defaults follow the step schedule)
        general_geometry: Calibrate σ with d^{1-2/q} in place of d
        sigma_constant: Analysis constant in the σ formula
    """

    geometry: LpGeometry
    constraint: ConstraintSet
    loss: LossFamily
    batch_size: int
    iterations: int
    step: StepSchedule
    noise: NoiseSpec
    budget: PrivacyBudget | None = None
    lipschitz: float = 1.0
    averaging: Literal["uniform", "weighted"] | None = None
    general_geometry: bool = False
    sigma_constant: float = DEFAULT_SIGMA_CONSTANT
    label: str = field(default="noisy_md")

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise DomainError(f"iterations must be >= 1, got {self.iterations}")
        if self.batch_size < 1:
            raise DomainError(f"batch size must be >= 1, got {self.batch_size}")
        if self.geometry.dimension != self.constraint.dimension:
            raise DomainError(
                f"geometry dimension {self.geometry.dimension} != "
                f"constraint dimension {self.constraint.dimension}"
            )
        if self.noise.mechanism != "gaussian":
            raise DomainError("noisy mirror descent uses Gaussian noise")
        if self.averaging is None:
            averaging = "weighted" if isinstance(self.step, StronglyConvexStep) else "uniform"
            object.__setattr__(self, "averaging", averaging)
        if self.noise.non_private:
            return
        if self.budget is None:
            raise PreconditionError("a privacy budget is required outside non-private mode")
        expected = self.expected_sigma()
        if abs(self.noise.scale - expected) > SIGMA_MATCH_RTOL * max(1.0, expected):
            raise PreconditionError(
                f"noise scale {self.noise.scale} does not match the calibrated sigma {expected}"
            )

    @property
    def dual_exponent(self) -> float:
        return self.geometry.q if self.general_geometry else math.inf

    def expected_sigma(self) -> float:
        if self.budget is None:
            raise PreconditionError("no privacy budget declared")
        return sigma_noisy_md(
            self.lipschitz,
            self.geometry.dimension,
            self.budget.delta,
            self.batch_size,
            self.budget.epsilon,
            q=self.dual_exponent,
            constant=self.sigma_constant,
        )


def calibrated_noise(
    lipschitz: float,
    d: int,
    batch_size: int,
    budget: PrivacyBudget | None,
    seed: int,
    *,
    q: float = math.inf,
    sigma_constant: float = DEFAULT_SIGMA_CONSTANT,
    non_private: bool = False,
) -> NoiseSpec:
    """Gaussian NoiseSpec with σ from the noisy mirror descent calibration.

    Raises:
        PreconditionError: No budget outside non-private mode, or the
            calibration gives σ = 0 (L = 0), which only exact mode may use
    """
    if non_private:
        return NoiseSpec(mechanism="gaussian", scale=0.0, rng_seed=seed, non_private=True)
    if budget is None:
        raise PreconditionError("a privacy budget is required outside non-private mode")
    sigma = sigma_noisy_md(
        lipschitz, d, budget.delta, batch_size, budget.epsilon, q=q, constant=sigma_constant
    )
    if not sigma > 0.0:
        raise PreconditionError(
            f"calibrated sigma is {sigma} (L = {lipschitz}); zero noise needs non_private=True"
        )
    return NoiseSpec(mechanism="gaussian", scale=sigma, rng_seed=seed)


@dataclass
class TraceRecord:
    """Snapshot of one logged iteration."""

    k: int
    x: Vector
    grad_count: int
    elapsed_s: float
    excess_empirical: float | None = None


@dataclass
class MdResult:
    """Output of noisy mirror descent.

    Attributes:
        x_out: Averaged iterate (uniform or weighted)
        last_iterate: x_{T+1}
        trace: Logged iterations
        grad_count: Per-sample gradient evaluations (b per iteration)
        noise_draws: Gaussian d-vectors drawn
        sigma: Per-sample noise scale
        effective_sigma: Scale of the noise on the batch mean, σ/√b
        max_violation: Largest constraint violation over all iterates
        non_private: Whether noise was disabled
    """

    x_out: Vector
    last_iterate: Vector
    trace: list[TraceRecord]
    grad_count: int
    noise_draws: int
    sigma: float
    effective_sigma: float
    max_violation: float
    non_private: bool
    sampling: str = "with_replacement"

    def summary(self) -> dict[str, object]:
        return {
            "grad_count": self.grad_count,
            "noise_draws": self.noise_draws,
            "sigma": self.sigma,
            "effective_sigma": self.effective_sigma,
            "max_violation": self.max_violation,
            "non_private": self.non_private,
            "sampling": self.sampling,
        }


def trace_stride(iterations: int) -> int:
    return max(1, math.ceil(iterations / MAX_TRACE_POINTS))


@traced("noisy_md")
def noisy_md(
    dataset: Dataset,
    config: MdConfig,
    x0: ArrayLike | None = None,
    *,
    reference_loss: float | None = None,
) -> MdResult:
    """Run T iterations of noisy mirror descent.

    Each iteration samples b points uniformly with replacement, averages their
    gradients each perturbed by an independent N(0, σ²I) vector, and takes a
    constrained mirror step. Iterates x_1 = x0, ..., x_T are averaged.

    Args:
        dataset: Training sample
        config: Run configuration
        x0: Feasible starting point (defaults to the constraint's feasible point)
        reference_loss: Optional min F̂ so trace records carry the excess loss

    Returns:
        MdResult with the averaged iterate and trace

    Raises:
        PreconditionError: If x0 is infeasible
        DomainError: If the dataset is empty
    """
    if dataset.n == 0:
        raise DomainError("noisy mirror descent needs a non-empty dataset")
    x = config.constraint.feasible_point() if x0 is None else as_vector(x0, "x0")
    violation = config.constraint.violation(x)
    if violation > FEASIBILITY_TOL:
        raise PreconditionError(f"starting point is infeasible (violation={violation:.3e})")

    sample_rng, noise_rng = spawn_rngs(config.noise.rng_seed, 2)
    noise = NoiseSource(rng=noise_rng)
    b, T, d = config.batch_size, config.iterations, dataset.d
    sigma = config.noise.scale
    stride = trace_stride(T)
    weighted = config.averaging == "weighted"

    total = np.zeros(d)
    weight_sum = 0.0
    trace: list[TraceRecord] = []
    max_violation = violation
    start = time.perf_counter()

    if config.noise.non_private:
        logger.warning("Noisy mirror descent running in non-private mode", extra={"label": config.label})

    for k in range(1, T + 1):
        weight = float(k) if weighted else 1.0
        total += weight * x
        weight_sum += weight

        if k == 1 or k == T or k % stride == 0:
            excess = None
            if reference_loss is not None:
                excess = empirical_loss(config.loss, x, dataset) - reference_loss
            trace.append(
                TraceRecord(k, x.copy(), (k - 1) * b, time.perf_counter() - start, excess)
            )

        indices = sample_rng.integers(0, dataset.n, size=b)
        per_sample = config.loss.per_sample_gradients(x, dataset, indices)
        perturbed = per_sample + noise.gaussian_vectors(b, d, sigma)
        g_hat = perturbed.mean(axis=1)
        x = mirror_step(config.geometry, config.constraint, x, g_hat, config.step.at(k))
        max_violation = max(max_violation, config.constraint.violation(x))

    grad_count = T * b
    record_gradients(config.label, grad_count)
    logger.info(
        "Noisy mirror descent finished",
        extra={
            "label": config.label,
            "iterations": T,
            "batch_size": b,
            "sigma": sigma,
            "grad_count": grad_count,
        },
    )
    return MdResult(
        x_out=total / weight_sum,
        last_iterate=x,
        trace=trace,
        grad_count=grad_count,
        noise_draws=noise.draws["gaussian"],
        sigma=sigma,
        effective_sigma=sigma / math.sqrt(b),
        max_violation=max_violation,
        non_private=config.noise.non_private,
    )


def default_step_convex(
    D: float, L: float, sigma: float, d: float, T: int, q: float = math.inf
) -> float:
    """Convex-mode step D/√T · 1/√(L² + 2σ²·ln d) (ℓ1 form, q = ∞).

    For finite q the general form D/√T · 1/√(L² + 4·d^{2/q}·σ²·ln d) is used.
    """
    if not (D > 0 and T >= 1 and d >= 1):
        raise DomainError(f"need D > 0, T >= 1, d >= 1, got D={D}, T={T}, d={d}")
    log_d = log_dimension(d)
    if math.isinf(q):
        denominator = L**2 + 2.0 * sigma**2 * log_d
    else:
        denominator = L**2 + 4.0 * d ** (2.0 / q) * sigma**2 * log_d
    if denominator <= 0:
        raise DomainError("step size undefined for L = sigma = 0")
    return D / math.sqrt(T) / math.sqrt(denominator)


def default_step_sc(mu: float, k: int) -> float:
    """Strongly convex step 2/(μ(k+1))."""
    if not mu > 0 or k < 1:
        raise DomainError(f"need mu > 0 and k >= 1, got mu={mu}, k={k}")
    return 2.0 / (mu * (k + 1))
