"""Localized noisy mirror descent: phased regularized ERM with shrinking balls."""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike

from dp_sco_toolkit.algorithms.mirror_descent import (
    MdConfig,
    StronglyConvexStep,
    calibrated_noise,
    noisy_md,
)
from dp_sco_toolkit.errors import DomainError, ParameterizationError, PreconditionError
from dp_sco_toolkit.geometry import (
    FEASIBILITY_TOL,
    ConstraintSet,
    Intersection,
    L1Ball,
    LpBall,
    LpGeometry,
    Vector,
    as_vector,
    dual_exponent,
    l1_proxy_exponent,
    log_dimension,
    lp_norm,
)
from dp_sco_toolkit.losses import Dataset, LossFamily, RegularizedLoss, empirical_loss, make_rng
from dp_sco_toolkit.observability import traced
from dp_sco_toolkit.privacy import DEFAULT_SIGMA_CONSTANT, PrivacyBudget, PrivacyLedger

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LocalizationMode:
    """ℓ1 mode (p = 1 + 1/ln d) or general ℓp mode with 1 < p <= 2."""

    kind: Literal["l1", "lp"] = "l1"
    p: float | None = None

    def __post_init__(self) -> None:
        if self.kind == "lp" and (self.p is None or not 1.0 < self.p <= 2.0):
            raise DomainError(f"lp mode needs 1 < p <= 2, got {self.p}")

    @classmethod
    def l1(cls) -> "LocalizationMode":
        return cls("l1")

    @classmethod
    def lp(cls, p: float) -> "LocalizationMode":
        return cls("lp", p)

    def exponent(self, d: int) -> float:
        return l1_proxy_exponent(d) if self.kind == "l1" else float(self.p)  # type: ignore[arg-type]


@dataclass(frozen=True)
class PhasePlan:
    """Rounded parameters of one localization phase."""

    i: int
    epsilon: float
    n: int
    eta: float
    batch_size: int
    iterations: int
    radius: float


@dataclass(frozen=True)
class PhaseSchedule:
    """Phase plans for k = ⌈log₂ n⌉ phases.

    Rounding: n_i = max(1, ⌊2^{-i}n⌋), b_i = ⌈max(√(n_i/ln d), √(d/ε_i))⌉,
    T_i = max(1, ⌊n_i²/b_i²⌋).
    """

    phases: tuple[PhasePlan, ...]
    p: float

    @property
    def k(self) -> int:
        return len(self.phases)

    @property
    def total_samples(self) -> int:
        return sum(phase.n for phase in self.phases)


def build_schedule(
    n: int, d: int, epsilon: float, eta: float, L: float, p: float
) -> PhaseSchedule:
    """Derive the phase schedule.

    Raises:
        ParameterizationError: If n < 2 or the phases need more than n samples
    """
    if n < 2:
        raise ParameterizationError(f"localization needs n >= 2 samples, got {n}")
    if not (epsilon > 0 and eta > 0 and L > 0):
        raise DomainError(f"need positive epsilon, eta, L; got {epsilon}, {eta}, {L}")
    k = math.ceil(math.log2(n))
    log_d = log_dimension(d)
    phases = []
    for i in range(1, k + 1):
        epsilon_i = epsilon * 2.0**-i
        n_i = max(1, n >> i)
        eta_i = eta * 2.0 ** (-4 * i)
        b_i = math.ceil(max(math.sqrt(n_i / log_d), math.sqrt(d / epsilon_i)))
        T_i = max(1, (n_i * n_i) // (b_i * b_i))
        radius_i = 2.0 * L * eta_i * n_i * (p - 1.0)
        phases.append(PhasePlan(i, epsilon_i, n_i, eta_i, b_i, T_i, radius_i))
    schedule = PhaseSchedule(tuple(phases), p)
    if schedule.total_samples > n:
        raise ParameterizationError(
            f"sum of phase sizes {schedule.total_samples} exceeds n = {n}"
        )
    return schedule


@dataclass
class PhaseReport:
    i: int
    epsilon: float
    n: int
    eta: float
    batch_size: int
    iterations: int
    radius: float
    sigma: float
    grad_count: int
    slice_start: int
    slice_stop: int
    phase_loss: float
    distance_to_reference: float | None = None
    max_violation: float = 0.0


@dataclass
class LocalizationReport:
    """Per-phase record plus totals for one localized run."""

    mode: str
    p: float
    phases: list[PhaseReport] = field(default_factory=list)
    ledger: PrivacyLedger = field(default_factory=PrivacyLedger)
    iterates: list[Vector] = field(default_factory=list, repr=False)

    @property
    def grad_count(self) -> int:
        return sum(phase.grad_count for phase in self.phases)

    def gradient_ceiling(self, n: int, d: int, epsilon: float) -> float:
        """log n · min(n^{3/2}·√(ln d), n²·ε/√d)."""
        return math.log(n) * min(
            n**1.5 * math.sqrt(log_dimension(d)), n * n * epsilon / math.sqrt(d)
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "p": self.p,
            "phases": [asdict(phase) for phase in self.phases],
            "grad_count": self.grad_count,
            "privacy": self.ledger.to_dict(),
        }


@traced("localized_md")
def localized_md(
    dataset: Dataset,
    D: float,
    budget: PrivacyBudget,
    L: float,
    x0: ArrayLike | None = None,
    mode: LocalizationMode | None = None,
    *,
    loss: LossFamily,
    constraint: ConstraintSet | None = None,
    eta: float | None = None,
    seed: int = 0,
    non_private: bool = False,
    sigma_constant: float = DEFAULT_SIGMA_CONSTANT,
    reference: ArrayLike | None = None,
) -> tuple[Vector, LocalizationReport]:
    """Localized noisy mirror descent.

    Phase i solves the regularized ERM F_i centered at x_{i-1} on a fresh slice
    of n_i samples, over X ∩ {‖x - x_{i-1}‖_p <= 2Lη_i n_i(p-1)}, with noisy
    mirror descent in strongly convex mode at budget (2^{-i}ε, δ).

    Args:
        dataset: Training sample
        D: Radius of the constraint set
        budget: Overall (ε, δ)
        L: Lipschitz constant of the base loss
        x0: Starting point (origin by default)
        mode: ℓ1 mode or ℓp mode
        loss: Base loss family
        constraint: Feasible set (ℓ1 or ℓp ball of radius D by default)
        eta: Base step size (theory default when None)
        seed: Run seed for the shuffle and every phase's streams
        non_private: Disable all noise
        sigma_constant: Analysis constant in the σ formula
        reference: Optional point (e.g. a known minimizer) to track distances to

    Returns:
        Final iterate x_k and the run report

    Raises:
        ParameterizationError: If the schedule is infeasible for n
        PreconditionError: If x0 is infeasible
    """
    mode = mode or LocalizationMode.l1()
    n, d = dataset.n, dataset.d
    p = mode.exponent(d)
    if constraint is None:
        constraint = L1Ball(d, D) if mode.kind == "l1" else LpBall(p=p, radius=D, center=np.zeros(d))
    if eta is None:
        if mode.kind == "l1":
            eta = default_eta_l1(D, L, n, d, budget.epsilon, budget.delta)
        else:
            eta = default_eta_lp(D, L, n, d, p, budget.epsilon, budget.delta)
    schedule = build_schedule(n, d, budget.epsilon, eta, L, p)

    x = np.zeros(d) if x0 is None else as_vector(x0, "x0")
    if constraint.violation(x) > FEASIBILITY_TOL:
        raise PreconditionError("starting point is infeasible")
    reference_point = None if reference is None else as_vector(reference, "reference")

    order = make_rng(seed).permutation(n)
    q = dual_exponent(p) if mode.kind == "lp" else math.inf
    report = LocalizationReport(mode=mode.kind, p=p)
    report.ledger.non_private = non_private
    report.iterates.append(x.copy())
    cursor = 0

    logger.info(
        "Localized mirror descent starting",
        extra={"n": n, "d": d, "phases": schedule.k, "p": p, "eta": eta, "mode": mode.kind},
    )
    for plan in schedule.phases:
        indices = order[cursor : cursor + plan.n]
        phase_data = dataset.subset(indices)
        geometry = LpGeometry(p=p, center=x)
        phase_constraint = Intersection.of(constraint, LpBall.around(geometry, plan.radius))
        phase_loss = RegularizedLoss(loss, geometry, plan.eta, plan.n)
        phase_budget = PrivacyBudget(epsilon=plan.epsilon, delta=budget.delta)
        phase_seed = seed * 1_000_003 + plan.i
        noise = calibrated_noise(
            L,
            d,
            plan.batch_size,
            phase_budget,
            phase_seed,
            q=q,
            sigma_constant=sigma_constant,
            non_private=non_private,
        )
        config = MdConfig(
            geometry=geometry,
            constraint=phase_constraint,
            loss=phase_loss,
            batch_size=plan.batch_size,
            iterations=plan.iterations,
            step=StronglyConvexStep(phase_loss.strong_convexity),
            noise=noise,
            budget=phase_budget,
            lipschitz=L,
            general_geometry=mode.kind == "lp",
            sigma_constant=sigma_constant,
            label="localized_md",
        )
        result = noisy_md(phase_data, config, x0=x)
        x = result.x_out
        report.iterates.append(x.copy())
        report.ledger.add(f"phase_{plan.i}", plan.epsilon, budget.delta)
        report.phases.append(
            PhaseReport(
                i=plan.i,
                epsilon=plan.epsilon,
                n=plan.n,
                eta=plan.eta,
                batch_size=plan.batch_size,
                iterations=plan.iterations,
                radius=plan.radius,
                sigma=result.sigma,
                grad_count=result.grad_count,
                slice_start=cursor,
                slice_stop=cursor + plan.n,
                phase_loss=empirical_loss(loss, x, phase_data),
                distance_to_reference=(
                    None if reference_point is None else lp_norm(x - reference_point, p)
                ),
                max_violation=result.max_violation,
            )
        )
        cursor += plan.n
        logger.debug("Localization phase finished", extra={"phase": plan.i, "grad_count": result.grad_count})

    logger.info(
        "Localized mirror descent finished",
        extra={"grad_count": report.grad_count, "total_epsilon": report.ledger.total_epsilon},
    )
    return x, report


def default_eta_l1(D: float, L: float, n: int, d: int, epsilon: float, delta: float) -> float:
    """(D/L)·min(√(ln d / n), ε/√(d·ln d·ln(1/δ)))."""
    if not (D > 0 and L > 0 and n >= 1 and epsilon >= 0 and 0 < delta < 1):
        raise DomainError("need D, L > 0, n >= 1, epsilon >= 0 and 0 < delta < 1")
    log_d = log_dimension(d)
    return (D / L) * min(
        math.sqrt(log_d / n), epsilon / math.sqrt(d * log_d * math.log(1.0 / delta))
    )


def default_eta_lp(
    D: float, L: float, n: int, d: int, p: float, epsilon: float, delta: float
) -> float:
    """(D/L)·min(1/√((p-1)n), ε/√(d·ln(1/δ)·(1 + ln d·[p < 2]))).

    Raises:
        DomainError: If p is outside (1, 2]
    """
    if not 1.0 < p <= 2.0:
        raise DomainError(f"p must lie in (1, 2], got {p}")
    if not (D > 0 and L > 0 and n >= 1 and epsilon >= 0 and 0 < delta < 1):
        raise DomainError("need D, L > 0, n >= 1, epsilon >= 0 and 0 < delta < 1")
    log_factor = 1.0 + (log_dimension(d) if p < 2.0 else 0.0)
    return (D / L) * min(
        1.0 / math.sqrt((p - 1.0) * n),
        epsilon / math.sqrt(d * math.log(1.0 / delta) * log_factor),
    )
