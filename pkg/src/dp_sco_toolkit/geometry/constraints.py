"""Constraint sets with feasibility oracles and vertex enumeration."""

import logging
from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import linprog

from dp_sco_toolkit.errors import DomainError, SolverError
from dp_sco_toolkit.geometry.lp_geometry import LpGeometry, Vector, as_vector, lp_norm

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-8


class ConstraintSet(ABC):
    """Closed convex set in R^d.

    Subclasses report how far a point is from being feasible and, where the
    set is a polytope with a short vertex list, enumerate its vertices.
    """

    @property
    @abstractmethod
    def dimension(self) -> int:
        """Ambient dimension d."""
        pass

    @property
    @abstractmethod
    def kind(self) -> str:
        """Short tag used in reports and result records."""
        pass

    @abstractmethod
    def violation(self, x: ArrayLike) -> float:
        """Amount by which x violates the set's defining inequalities (0 if feasible)."""
        pass

    @abstractmethod
    def feasible_point(self) -> Vector:
        """A point guaranteed to lie in the set."""
        pass

    def vertices(self) -> Vector:
        """Vertex matrix of shape (m, d).

        Raises:
            DomainError: If the set has no finite vertex list
        """
        raise DomainError(f"{self.kind} constraint has no finite vertex list")

    def vertex_scores(self, v: ArrayLike) -> Vector:
        """Inner products <c_i, v> for every vertex c_i."""
        return self.vertices() @ as_vector(v, "v")

    def contains(self, x: ArrayLike, tol: float = FEASIBILITY_TOL) -> bool:
        return self.violation(x) <= tol

    def _check(self, x: ArrayLike) -> Vector:
        arr = as_vector(x)
        if arr.shape[0] != self.dimension:
            raise DomainError(
                f"point has dimension {arr.shape[0]}, constraint has {self.dimension}"
            )
        return arr


@dataclass(frozen=True, eq=False)
class L1Ball(ConstraintSet):
    """{x : ‖x‖₁ <= radius}, with the 2d vertices ±radius·e_j."""

    d: int
    radius: float

    def __post_init__(self) -> None:
        if self.d < 1:
            raise DomainError(f"dimension must be >= 1, got {self.d}")
        if not self.radius > 0:
            raise DomainError(f"radius must be > 0, got {self.radius}")

    @property
    def dimension(self) -> int:
        return self.d

    @property
    def kind(self) -> str:
        return "l1_ball"

    def violation(self, x: ArrayLike) -> float:
        return max(0.0, lp_norm(self._check(x), 1.0) - self.radius)

    def feasible_point(self) -> Vector:
        return np.zeros(self.d)

    def vertices(self) -> Vector:
        basis = self.radius * np.eye(self.d)
        return np.concatenate([basis, -basis])

    def vertex_scores(self, v: ArrayLike) -> Vector:
        scaled = self.radius * as_vector(v, "v")
        return np.concatenate([scaled, -scaled])


@dataclass(frozen=True, eq=False)
class LpBall(ConstraintSet):
    """{x : ‖x - center‖_p <= radius} for p >= 1."""

    p: float
    radius: float
    center: Vector = field(repr=False)

    def __post_init__(self) -> None:
        if self.p < 1.0:
            raise DomainError(f"ball exponent must be >= 1, got {self.p}")
        if not self.radius > 0:
            raise DomainError(f"radius must be > 0, got {self.radius}")
        center = as_vector(self.center, "center")
        center.setflags(write=False)
        object.__setattr__(self, "center", center)

    @classmethod
    def around(cls, geom: LpGeometry, radius: float) -> "LpBall":
        """Ball in the geometry's own norm around the geometry's center."""
        return cls(p=geom.p, radius=radius, center=geom.center)

    @property
    def dimension(self) -> int:
        return int(self.center.shape[0])

    @property
    def kind(self) -> str:
        return "lp_ball"

    def violation(self, x: ArrayLike) -> float:
        return max(0.0, lp_norm(self._check(x) - self.center, self.p) - self.radius)

    def feasible_point(self) -> Vector:
        return self.center.copy()

    def matches(self, geom: LpGeometry) -> bool:
        """True when the ball is a sublevel set of the geometry's mirror map."""
        return abs(self.p - geom.p) <= 1e-12 and np.array_equal(self.center, geom.center)


@dataclass(frozen=True, eq=False)
class Simplex(ConstraintSet):
    """Probability simplex {x >= 0 : Σx = 1}."""

    d: int

    def __post_init__(self) -> None:
        if self.d < 1:
            raise DomainError(f"dimension must be >= 1, got {self.d}")

    @property
    def dimension(self) -> int:
        return self.d

    @property
    def kind(self) -> str:
        return "simplex"

    def violation(self, x: ArrayLike) -> float:
        arr = self._check(x)
        return max(0.0, -float(arr.min()), abs(float(arr.sum()) - 1.0))

    def feasible_point(self) -> Vector:
        return np.full(self.d, 1.0 / self.d)

    def vertices(self) -> Vector:
        return np.eye(self.d)

    def vertex_scores(self, v: ArrayLike) -> Vector:
        return as_vector(v, "v").copy()


@dataclass(frozen=True, eq=False)
class ConvexHull(ConstraintSet):
    """Convex hull of an explicit vertex list (rows of ``points``)."""

    points: Vector = field(repr=False)

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[0] < 1:
            raise DomainError("convex hull needs a non-empty (m, d) vertex matrix")
        if not np.all(np.isfinite(points)):
            raise DomainError("vertex matrix contains non-finite entries")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def dimension(self) -> int:
        return int(self.points.shape[1])

    @property
    def kind(self) -> str:
        return "convex_hull"

    def violation(self, x: ArrayLike) -> float:
        # min_{λ in simplex} ‖Vᵀλ - x‖_∞ as an LP in (λ, t)
        arr = self._check(x)
        m, d = self.points.shape
        cost = np.zeros(m + 1)
        cost[-1] = 1.0
        vt = self.points.T
        ones = np.ones((d, 1))
        a_ub = np.block([[vt, -ones], [-vt, -ones]])
        b_ub = np.concatenate([arr, -arr])
        a_eq = np.concatenate([np.ones(m), [0.0]])[None, :]
        result = linprog(
            cost,
            A_ub=a_ub,
            b_ub=b_ub,
            A_eq=a_eq,
            b_eq=[1.0],
            bounds=[(0, None)] * (m + 1),
            method="highs",
        )
        if not result.success:  # pragma: no cover
            raise SolverError(f"hull membership LP failed: {result.message}", residual=np.inf)
        return max(0.0, float(result.fun))

    def feasible_point(self) -> Vector:
        return self.points[0].copy()

    def vertices(self) -> Vector:
        return self.points


@dataclass(frozen=True, eq=False)
class Intersection(ConstraintSet):
    """Intersection of constraint sets sharing one dimension."""

    parts: tuple[ConstraintSet, ...]

    def __post_init__(self) -> None:
        flat: list[ConstraintSet] = []
        for part in self.parts:
            flat.extend(part.parts if isinstance(part, Intersection) else [part])
        if not flat:
            raise DomainError("intersection needs at least one set")
        dims = {part.dimension for part in flat}
        if len(dims) != 1:
            raise DomainError(f"intersected sets disagree on dimension: {sorted(dims)}")
        object.__setattr__(self, "parts", tuple(flat))

    @classmethod
    def of(cls, *parts: ConstraintSet) -> "Intersection":
        return cls(parts=tuple(parts))

    @property
    def dimension(self) -> int:
        return self.parts[0].dimension

    @property
    def kind(self) -> str:
        return "intersection"

    def violation(self, x: ArrayLike) -> float:
        return max(part.violation(x) for part in self.parts)

    def feasible_point(self) -> Vector:
        for part in self.parts:
            candidate = part.feasible_point()
            if self.contains(candidate):
                return candidate
        raise DomainError("no member of the intersection supplies a common feasible point")


def constraint_summary(constraint: ConstraintSet) -> dict[str, object]:
    """JSON-friendly description of a constraint for reports."""
    if isinstance(constraint, L1Ball):
        return {"kind": constraint.kind, "d": constraint.d, "radius": constraint.radius}
    if isinstance(constraint, LpBall):
        return {
            "kind": constraint.kind,
            "p": constraint.p,
            "radius": constraint.radius,
            "center_norm": lp_norm(constraint.center, 2.0),
        }
    if isinstance(constraint, Intersection):
        return {"kind": constraint.kind, "parts": _summaries(constraint.parts)}
    return {"kind": constraint.kind, "d": constraint.dimension}


def _summaries(parts: Sequence[ConstraintSet]) -> list[dict[str, object]]:
    return [constraint_summary(part) for part in parts]
