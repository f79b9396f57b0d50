"""ℓp norms, dual exponents and the shifted ℓp mirror map."""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dp_sco_toolkit.errors import DomainError

logger = logging.getLogger(__name__)

Vector = NDArray[np.float64]

CONJUGACY_TOL = 1e-12


def as_vector(x: ArrayLike, name: str = "x") -> Vector:
    """Convert input to a finite 1-D float vector.

    Args:
        x: Array-like input
        name: Name used in error messages

    Returns:
        Float64 vector

    Raises:
        DomainError: If the input is not one-dimensional or not finite
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    return arr


def log_dimension(d: float) -> float:
    """Natural log of the dimension, clamped below at 1."""
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    return max(math.log(d), 1.0)


def l1_proxy_exponent(d: int) -> float:
    """Exponent p = 1 + 1/ln d used in place of the non-smooth ℓ1 geometry."""
    return 1.0 + 1.0 / log_dimension(d)


def dual_exponent(p: float) -> float:
    """Return q with 1/p + 1/q = 1.

    Args:
        p: Primal exponent, strictly greater than 1 (``math.inf`` maps to 1)

    Returns:
        Dual exponent q

    Raises:
        DomainError: If p <= 1
    """
    if not p > 1.0:
        raise DomainError(f"exponent must be > 1, got {p}")
    if math.isinf(p):
        return 1.0
    if p == 2.0:
        return 2.0
    return p / (p - 1.0)


def lp_norm(x: ArrayLike, p: float) -> float:
    """ℓp norm of a vector, ``p = math.inf`` giving the max norm."""
    if p < 1.0:
        raise DomainError(f"norm exponent must be >= 1, got {p}")
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.size == 0:
        return 0.0
    return float(np.linalg.norm(arr, ord=p))


def signed_power(x: NDArray[np.float64], exponent: float) -> Vector:
    """Coordinate-wise sign(x)·|x|^exponent."""
    return np.sign(x) * np.abs(x) ** exponent


@dataclass(frozen=True, eq=False)
class LpGeometry:
    """Mirror map h(x) = (1/(p-1))·‖x - center‖_p² for 1 < p <= 2.

    h is 2-strongly convex with respect to ‖·‖_p, so D_h(x, y) >= ‖x - y‖_p².

    Attributes:
        p: Primal exponent in (1, 2]
        center: Shift of the mirror map
    """

    p: float
    center: Vector = field(repr=False)

    def __post_init__(self) -> None:
        if not 1.0 < self.p <= 2.0:
            raise DomainError(f"geometry exponent must lie in (1, 2], got {self.p}")
        center = as_vector(self.center, "center")
        center.setflags(write=False)
        object.__setattr__(self, "center", center)
        q = dual_exponent(self.p)
        if abs(1.0 / self.p + 1.0 / q - 1.0) > CONJUGACY_TOL:  # pragma: no cover
            raise DomainError(f"dual exponent {q} is not conjugate to {self.p}")

    @classmethod
    def centered(cls, p: float, d: int, center: ArrayLike | None = None) -> "LpGeometry":
        """Create a geometry in dimension d, centered at the origin by default."""
        if center is None:
            return cls(p=p, center=np.zeros(d))
        return cls(p=p, center=as_vector(center, "center"))

    @classmethod
    def for_l1(cls, d: int, center: ArrayLike | None = None) -> "LpGeometry":
        """Geometry with p = 1 + 1/ln d, the smooth stand-in for ℓ1."""
        return cls.centered(l1_proxy_exponent(d), d, center)

    @property
    def q(self) -> float:
        return dual_exponent(self.p)

    @property
    def dimension(self) -> int:
        return int(self.center.shape[0])

    def recentered(self, center: ArrayLike) -> "LpGeometry":
        return LpGeometry(p=self.p, center=as_vector(center, "center"))

    def _check(self, x: ArrayLike, name: str) -> Vector:
        arr = as_vector(x, name)
        if arr.shape != self.center.shape:
            raise DomainError(
                f"{name} has dimension {arr.shape[0]}, geometry has {self.dimension}"
            )
        return arr

    def potential(self, x: ArrayLike) -> float:
        """Evaluate h(x)."""
        u = self._check(x, "x") - self.center
        return lp_norm(u, self.p) ** 2 / (self.p - 1.0)

    def gradient(self, x: ArrayLike) -> Vector:
        """Evaluate ∇h(x) = (2/(p-1))·‖u‖_p^{2-p}·sign(u)|u|^{p-1}, u = x - center."""
        u = self._check(x, "x") - self.center
        return (2.0 / (self.p - 1.0)) * _half_square_gradient(u, self.p)

    def inverse_gradient(self, theta: ArrayLike) -> Vector:
        """Return x with ∇h(x) = theta."""
        w = (self.p - 1.0) / 2.0 * self._check(theta, "theta")
        return self.center + _half_square_gradient(w, self.q)


def _half_square_gradient(u: Vector, p: float) -> Vector:
    # ∇(½‖u‖_p²), evaluated on u / max|u| to stay in range
    scale = float(np.max(np.abs(u))) if u.size else 0.0
    if scale == 0.0:
        return np.zeros_like(u)
    unit = u / scale
    return scale * lp_norm(unit, p) ** (2.0 - p) * signed_power(unit, p - 1.0)


def bregman_divergence(geom: LpGeometry, x: ArrayLike, y: ArrayLike) -> float:
    """D_h(x, y) = h(x) - h(y) - <∇h(y), x - y>.

    Args:
        geom: Mirror-map geometry
        x: First point
        y: Reference point

    Returns:
        Non-negative divergence (rounding below zero is clipped)

    Raises:
        DomainError: If either point is non-finite or has the wrong dimension
    """
    xv = geom._check(x, "x")
    yv = geom._check(y, "y")
    value = geom.potential(xv) - geom.potential(yv) - float(geom.gradient(yv) @ (xv - yv))
    return max(value, 0.0)
