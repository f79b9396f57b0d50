"""Constrained Bregman-prox steps for the ℓp mirror map and the entropic map.

A constrained step solves min_{x in X} h(x) - <θ, x> with θ = ∇h(x_k) - η·g.
The ℓp potential couples coordinates only through ρ = ‖x - center‖_p, so for a
fixed curvature a = (2/(p-1))·ρ^{2-p} the problem separates per coordinate.
The curvature is found as a scalar fixed point and the set's Lagrange
multiplier by bisection.
"""

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import bisect, brentq
from scipy.special import softmax

from dp_sco_toolkit.errors import DomainError, PreconditionError, SolverError
from dp_sco_toolkit.geometry.constraints import (
    FEASIBILITY_TOL,
    ConstraintSet,
    Intersection,
    L1Ball,
    LpBall,
    Simplex,
)
from dp_sco_toolkit.geometry.lp_geometry import (
    LpGeometry,
    Vector,
    as_vector,
    bregman_divergence,
    lp_norm,
    signed_power,
)

logger = logging.getLogger(__name__)

MULTIPLIER_XTOL = 1e-10
MAX_BISECTION_ITERATIONS = 200
CURVATURE_XTOL = 1e-14
DYKSTRA_MAX_ROUNDS = 500
DYKSTRA_TOL = 1e-8

_LOG_LIMIT = 690.0
_CLIP = 1e300
_COORDINATE_BISECTIONS = 120


def _inverse_power(w: Vector, p: float) -> Vector:
    # inverse of u -> sign(u)|u|^{p-1}
    with np.errstate(over="ignore"):
        return signed_power(w, 1.0 / (p - 1.0))


class _SeparableModel(ABC):
    """Per-coordinate minimizer of (a/p)|u|^p - θ·u + multiplier·penalty(u)."""

    equality = False

    def __init__(self, p: float) -> None:
        self.p = p

    @abstractmethod
    def solve(self, theta: Vector, a: float, multiplier: float) -> Vector:
        pass

    @abstractmethod
    def slack(self, u: Vector) -> float:
        """Constraint value minus its bound; feasible when <= 0 (== 0 for equalities)."""
        pass

    def finalize(self, x: Vector) -> Vector:
        return x


class _FreeModel(_SeparableModel):
    def solve(self, theta: Vector, a: float, multiplier: float) -> Vector:
        return _inverse_power(theta / a, self.p)

    def slack(self, u: Vector) -> float:
        return -math.inf


class _L1Model(_SeparableModel):
    """‖u - offset‖₁ <= radius; the kink sits at u = offset."""

    def __init__(self, p: float, offset: Vector, radius: float) -> None:
        super().__init__(p)
        self.offset = offset
        self.radius = radius
        self._offset_power = signed_power(offset, p - 1.0)

    def solve(self, theta: Vector, a: float, multiplier: float) -> Vector:
        at_kink = a * self._offset_power - theta
        with np.errstate(over="ignore", invalid="ignore"):
            above = _inverse_power((theta - multiplier) / a, self.p)
            below = _inverse_power((theta + multiplier) / a, self.p)
        return np.where(
            at_kink + multiplier < 0.0,
            above,
            np.where(at_kink - multiplier > 0.0, below, self.offset),
        )

    def slack(self, u: Vector) -> float:
        return lp_norm(u - self.offset, 1.0) - self.radius


class _PowerBallModel(_SeparableModel):
    """‖u - offset‖_r <= radius for 1 < r, solved by per-coordinate bisection."""

    def __init__(self, p: float, offset: Vector, r: float, radius: float) -> None:
        super().__init__(p)
        self.offset = offset
        self.r = r
        self.radius = radius

    def solve(self, theta: Vector, a: float, multiplier: float) -> Vector:
        free = _inverse_power(theta / a, self.p)
        if multiplier == 0.0:
            return free
        lo = np.minimum(self.offset, free)
        hi = np.maximum(self.offset, free)
        for _ in range(_COORDINATE_BISECTIONS):
            mid = 0.5 * (lo + hi)
            stationarity = (
                a * signed_power(mid, self.p - 1.0)
                + multiplier * signed_power(mid - self.offset, self.r - 1.0)
                - theta
            )
            lo = np.where(stationarity < 0.0, mid, lo)
            hi = np.where(stationarity < 0.0, hi, mid)
        return 0.5 * (lo + hi)

    def slack(self, u: Vector) -> float:
        return lp_norm(u - self.offset, self.r) - self.radius


class _SimplexModel(_SeparableModel):
    """u >= lower, Σu = total."""

    equality = True

    def __init__(self, p: float, lower: Vector, total: float) -> None:
        super().__init__(p)
        self.lower = lower
        self.total = total

    def solve(self, theta: Vector, a: float, multiplier: float) -> Vector:
        return np.maximum(_inverse_power((theta - multiplier) / a, self.p), self.lower)

    def slack(self, u: Vector) -> float:
        return float(u.sum()) - self.total

    def finalize(self, x: Vector) -> Vector:
        clipped = np.maximum(x, 0.0)
        return clipped / clipped.sum()


def _clipped(value: float) -> float:
    if math.isnan(value):
        return -_CLIP
    return float(np.clip(value, -_CLIP, _CLIP))


def _log_norm(u: Vector, p: float) -> float:
    norm = lp_norm(u, p)
    if not math.isfinite(norm):
        return math.inf
    return math.log(norm) if norm > 0.0 else -math.inf


def _fixed_point_curvature(
    solve_at: Callable[[float], Vector], p: float
) -> float | None:
    """Solve a = (2/(p-1))·‖u(a)‖_p^{2-p} in log a; None when u(a) -> 0."""
    log_coef = math.log(2.0 / (p - 1.0))

    def gap(t: float) -> float:
        with np.errstate(over="ignore", invalid="ignore"):
            return _clipped(t - log_coef - (2.0 - p) * _log_norm(solve_at(math.exp(t)), p))

    lo = hi = log_coef
    step = 1.0
    while gap(lo) > 0.0:
        lo -= step
        step *= 2.0
        if lo < -_LOG_LIMIT:
            return None
    step = 1.0
    while (value := gap(hi)) < 0.0:
        hi += step
        step *= 2.0
        if hi > _LOG_LIMIT:
            raise SolverError("curvature bracket did not close", residual=value)
    if lo == hi:
        return math.exp(lo)
    return math.exp(brentq(gap, lo, hi, xtol=CURVATURE_XTOL, maxiter=MAX_BISECTION_ITERATIONS))


def _cap_curvature(solve_at: Callable[[float], Vector], p: float, cap: float, a: float) -> float:
    """Smallest curvature >= a whose solution has ‖u‖_p = cap."""
    log_cap = math.log(cap)

    def excess(t: float) -> float:
        with np.errstate(over="ignore", invalid="ignore"):
            return _clipped(_log_norm(solve_at(math.exp(t)), p) - log_cap)

    lo = hi = math.log(a)
    step = 1.0
    while (value := excess(hi)) > 0.0:
        hi += step
        step *= 2.0
        if hi > _LOG_LIMIT:
            raise SolverError("localization ball cannot be reached", residual=value)
    if lo == hi:
        return a
    return math.exp(brentq(excess, lo, hi, xtol=CURVATURE_XTOL, maxiter=MAX_BISECTION_ITERATIONS))


def _inner_solution(
    model: _SeparableModel, theta: Vector, multiplier: float, cap: float | None
) -> Vector:
    """Minimize h(u) - <θ,u> + multiplier·penalty(u) over ‖u‖_p <= cap."""
    p = model.p

    def solve_at(a: float) -> Vector:
        return model.solve(theta, a, multiplier)

    if p == 2.0:
        a: float | None = 2.0
    else:
        a = _fixed_point_curvature(solve_at, p)
    if a is None:
        return solve_at(math.exp(-_LOG_LIMIT))
    u = solve_at(a)
    if cap is None:
        return u
    norm = lp_norm(u, p)
    if norm <= cap:
        return u
    if not isinstance(model, _FreeModel):
        u = solve_at(_cap_curvature(solve_at, p, cap, a))
        norm = lp_norm(u, p)
    return u * (cap / norm) if norm > cap else u


def _multiplier_bracket(f: Callable[[float], float], equality: bool) -> tuple[float, float]:
    hi = 1.0
    for _ in range(MAX_BISECTION_ITERATIONS):
        if f(hi) <= 0.0:
            break
        hi *= 2.0
    else:
        raise SolverError("multiplier bracket did not close", residual=f(hi))
    if not equality:
        return 0.0, hi
    lo = -1.0
    for _ in range(MAX_BISECTION_ITERATIONS):
        if f(lo) >= 0.0:
            return lo, hi
        lo *= 2.0
    raise SolverError("multiplier bracket did not close", residual=f(lo))


def _constrained_solution(model: _SeparableModel, theta: Vector, cap: float | None) -> Vector:
    if isinstance(model, _FreeModel):
        return _inner_solution(model, theta, 0.0, cap)

    def slack_at(multiplier: float) -> float:
        return model.slack(_inner_solution(model, theta, multiplier, cap))

    if not model.equality:
        unconstrained = _inner_solution(model, theta, 0.0, cap)
        if model.slack(unconstrained) <= 0.0:
            return unconstrained

    lo, hi = _multiplier_bracket(slack_at, model.equality)
    root, result = bisect(
        slack_at,
        lo,
        hi,
        xtol=MULTIPLIER_XTOL,
        maxiter=MAX_BISECTION_ITERATIONS,
        full_output=True,
        disp=False,
    )
    if not result.converged:
        raise SolverError(
            f"multiplier bisection stopped after {result.iterations} iterations",
            residual=slack_at(root),
        )
    # inequality multipliers are read on the feasible side of the bracket
    multiplier = root if model.equality else min(root + 2.0 * MULTIPLIER_XTOL, hi)
    logger.debug(
        "Bregman projection multiplier solved",
        extra={"multiplier": multiplier, "iterations": result.iterations},
    )
    return _inner_solution(model, theta, multiplier, cap)


def _model_for(part: ConstraintSet | None, geom: LpGeometry) -> _SeparableModel:
    p = geom.p
    if part is None:
        return _FreeModel(p)
    if isinstance(part, L1Ball):
        return _L1Model(p, offset=-geom.center, radius=part.radius)
    if isinstance(part, LpBall):
        offset = part.center - geom.center
        if part.p == 1.0:
            return _L1Model(p, offset=offset, radius=part.radius)
        return _PowerBallModel(p, offset=offset, r=part.p, radius=part.radius)
    if isinstance(part, Simplex):
        return _SimplexModel(p, lower=-geom.center, total=1.0 - float(geom.center.sum()))
    raise DomainError(f"Bregman projection onto a {part.kind} constraint is not supported")


def _alternating_projection(
    geom: LpGeometry, parts: Sequence[ConstraintSet], theta: Vector
) -> Vector:
    """Bregman-Dykstra alternation with dual corrections per set."""
    intersection = Intersection(parts=tuple(parts))
    x = geom.inverse_gradient(theta)
    corrections = [np.zeros_like(theta) for _ in parts]
    change = math.inf
    for round_index in range(DYKSTRA_MAX_ROUNDS):
        previous = x
        for i, part in enumerate(parts):
            dual = geom.gradient(x) + corrections[i]
            x = bregman_projection(geom, part, dual)
            corrections[i] = dual - geom.gradient(x)
        change = lp_norm(x - previous, math.inf)
        if change <= DYKSTRA_TOL and intersection.violation(x) <= FEASIBILITY_TOL:
            logger.debug("Alternating projection converged", extra={"rounds": round_index + 1})
            return x
    raise SolverError(
        f"alternating projections did not converge in {DYKSTRA_MAX_ROUNDS} rounds",
        residual=max(change, intersection.violation(x)),
    )


def bregman_projection(geom: LpGeometry, constraint: ConstraintSet, theta: ArrayLike) -> Vector:
    """Return argmin_{x in X} h(x) - <θ, x>.

    A ball in the geometry's own norm around its center only caps ‖x - center‖_p
    and is folded into the curvature search; together with at most one other set
    the projection is exact. Larger intersections fall back to alternating
    Bregman projections.

    Args:
        geom: Mirror-map geometry
        constraint: Target set
        theta: Dual point

    Returns:
        The Bregman projection of ∇h*(θ) onto the set

    Raises:
        DomainError: For sets without a projection routine (explicit hulls)
        SolverError: If a multiplier search or the alternation fails to converge
    """
    dual = as_vector(theta, "theta")
    parts = constraint.parts if isinstance(constraint, Intersection) else (constraint,)
    caps = [part.radius for part in parts if isinstance(part, LpBall) and part.matches(geom)]
    others = [part for part in parts if not (isinstance(part, LpBall) and part.matches(geom))]
    cap = min(caps) if caps else None

    if len(others) > 1:
        if cap is not None:
            others.append(LpBall.around(geom, cap))
        return _alternating_projection(geom, others, dual)

    model = _model_for(others[0] if others else None, geom)
    if isinstance(model, _FreeModel):
        u = geom.inverse_gradient(dual) - geom.center
        norm = lp_norm(u, geom.p)
        if cap is not None and norm > cap:
            u = u * (cap / norm)
    else:
        u = _constrained_solution(model, dual, cap)
    return model.finalize(geom.center + u)


def mirror_step(
    geom: LpGeometry,
    constraint: ConstraintSet,
    x_k: ArrayLike,
    g: ArrayLike,
    eta: float,
) -> Vector:
    """Constrained Bregman-prox step argmin_{x in X} <g, x - x_k> + D_h(x, x_k)/η.

    Args:
        geom: Mirror-map geometry
        constraint: Feasible set X
        x_k: Current (feasible) iterate
        g: Gradient estimate
        eta: Step size, > 0

    Returns:
        Next iterate

    Raises:
        DomainError: Non-finite inputs or non-positive step
        PreconditionError: If x_k is infeasible
        SolverError: If the projection does not converge
    """
    x = as_vector(x_k, "x_k")
    grad = as_vector(g, "g")
    if grad.shape != x.shape:
        raise DomainError(f"gradient dimension {grad.shape[0]} != iterate dimension {x.shape[0]}")
    if not (math.isfinite(eta) and eta > 0.0):
        raise DomainError(f"step size must be positive and finite, got {eta}")
    violation = constraint.violation(x)
    if violation > FEASIBILITY_TOL:
        raise PreconditionError(f"current iterate is infeasible (violation={violation:.3e})")
    if not np.any(grad):
        return x.copy()
    return bregman_projection(geom, constraint, geom.gradient(x) - eta * grad)


def prox_objective(
    geom: LpGeometry, x: ArrayLike, x_k: ArrayLike, g: ArrayLike, eta: float
) -> float:
    """Objective <g, x - x_k> + D_h(x, x_k)/η minimized by mirror_step."""
    xv = as_vector(x)
    return float(as_vector(g, "g") @ (xv - as_vector(x_k, "x_k"))) + bregman_divergence(
        geom, xv, x_k
    ) / eta


def entropic_md_step(x_k: ArrayLike, g: ArrayLike, eta: float) -> Vector:
    """Multiplicative-weights step x⁺ ∝ x_k·exp(-η·g) on the simplex.

    Zero coordinates stay zero whatever the gradient sign.

    Raises:
        PreconditionError: If x_k is not on the simplex
    """
    x = as_vector(x_k, "x_k")
    grad = as_vector(g, "g")
    if grad.shape != x.shape:
        raise DomainError(f"gradient dimension {grad.shape[0]} != iterate dimension {x.shape[0]}")
    if not (math.isfinite(eta) and eta > 0.0):
        raise DomainError(f"step size must be positive and finite, got {eta}")
    violation = Simplex(x.shape[0]).violation(x)
    if violation > FEASIBILITY_TOL:
        raise PreconditionError(f"iterate is not on the simplex (violation={violation:.3e})")
    with np.errstate(divide="ignore"):
        logits = np.log(np.clip(x, 0.0, None)) - eta * grad
    return np.asarray(softmax(logits), dtype=np.float64)
