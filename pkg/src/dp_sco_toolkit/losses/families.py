"""Loss families f(x; z) with gradients and declared constants."""

import math
from abc import ABC, abstractmethod

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dp_sco_toolkit.errors import DomainError
from dp_sco_toolkit.geometry import LpGeometry, Vector, as_vector, lp_norm
from dp_sco_toolkit.losses.datasets import DataPoint, Dataset, Indices


def dual_scale(p: float, d: int) -> float:
    """d^{1/q}, the factor turning an ℓ∞ bound into an ℓq bound (q dual to p)."""
    if p < 1.0:
        raise DomainError(f"norm exponent must be >= 1, got {p}")
    if p == 1.0:
        return 1.0
    q = p / (p - 1.0) if math.isfinite(p) else 1.0
    return float(d ** (1.0 / q))


class LossFamily(ABC):
    """Pluggable loss f(x; z).

    Gradients are evaluated in batches over dataset columns; the single-point
    methods exist for the oracle interface and tests.
    """

    kind = "abstract"

    @abstractmethod
    def batch_losses(self, x: Vector, features: NDArray[np.float64], targets: Vector | None) -> Vector:
        """Per-sample losses for a (d, k) feature block."""
        pass

    @abstractmethod
    def batch_gradients(
        self, x: Vector, features: NDArray[np.float64], targets: Vector | None
    ) -> NDArray[np.float64]:
        """Per-sample gradients as a (d, k) block."""
        pass

    @abstractmethod
    def lipschitz(self, p: float, d: int) -> float:
        """Bound on ‖∇f‖_q over the domain {‖x‖_p <= D} (q dual to p)."""
        pass

    def smoothness(self, p: float, d: int) -> float:
        """Bound on ‖∇f(x) - ∇f(y)‖_q / ‖x - y‖_p."""
        return math.inf

    @property
    def strong_convexity(self) -> float:
        """Relative strong convexity μ (0 unless regularized)."""
        return 0.0

    def losses(self, x: ArrayLike, dataset: Dataset, indices: Indices = None) -> Vector:
        features, targets = dataset.columns(indices)
        return self.batch_losses(as_vector(x), features, targets)

    def per_sample_gradients(
        self, x: ArrayLike, dataset: Dataset, indices: Indices = None
    ) -> NDArray[np.float64]:
        features, targets = dataset.columns(indices)
        return self.batch_gradients(as_vector(x), features, targets)

    def mean_gradient(self, x: ArrayLike, dataset: Dataset, indices: Indices = None) -> Vector:
        grads = self.per_sample_gradients(x, dataset, indices)
        if grads.shape[1] == 0:
            raise DomainError("cannot average gradients over an empty sample")
        return np.asarray(grads.mean(axis=1))

    def value(self, x: ArrayLike, point: DataPoint) -> float:
        targets = None if point.b is None else np.array([point.b])
        return float(self.batch_losses(as_vector(x), point.z[:, None], targets)[0])

    def gradient(self, x: ArrayLike, point: DataPoint) -> Vector:
        targets = None if point.b is None else np.array([point.b])
        return np.asarray(self.batch_gradients(as_vector(x), point.z[:, None], targets)[:, 0])


class AbsL1Loss(LossFamily):
    """f(x; z) = L·‖x - z‖₁, subgradient L·sign(x - z) with 0 at ties."""

    kind = "abs_l1"

    def __init__(self, scale: float = 1.0) -> None:
        if not scale >= 0:
            raise DomainError(f"scale must be >= 0, got {scale}")
        self.scale = scale

    def batch_losses(self, x: Vector, features: NDArray[np.float64], targets: Vector | None) -> Vector:
        return self.scale * np.abs(x[:, None] - features).sum(axis=0)

    def batch_gradients(
        self, x: Vector, features: NDArray[np.float64], targets: Vector | None
    ) -> NDArray[np.float64]:
        return self.scale * np.sign(x[:, None] - features)

    def lipschitz(self, p: float, d: int) -> float:
        return self.scale * dual_scale(p, d)


class QuadraticLoss(LossFamily):
    """f(x; a, b) = (<a, x> - b)² with ‖a‖_∞ <= C, |b| <= C·D, ‖x‖_p <= D.

    In ℓ1 geometry L = 4C²D and β = 2C².
    """

    kind = "quadratic"

    def __init__(self, C: float, D: float) -> None:
        if not (C > 0 and D > 0):
            raise DomainError(f"C and D must be positive, got C={C}, D={D}")
        self.C = C
        self.D = D

    def _residuals(self, x: Vector, features: NDArray[np.float64], targets: Vector | None) -> Vector:
        if targets is None:
            raise DomainError("quadratic loss needs targets b")
        return np.asarray(x @ features - targets)

    def batch_losses(self, x: Vector, features: NDArray[np.float64], targets: Vector | None) -> Vector:
        return self._residuals(x, features, targets) ** 2

    def batch_gradients(
        self, x: Vector, features: NDArray[np.float64], targets: Vector | None
    ) -> NDArray[np.float64]:
        return 2.0 * features * self._residuals(x, features, targets)[None, :]

    def lipschitz(self, p: float, d: int) -> float:
        a_dual = self.C * dual_scale(p, d)
        return 2.0 * self.C * self.D * (1.0 + dual_scale(p, d)) * a_dual

    def smoothness(self, p: float, d: int) -> float:
        return 2.0 * (self.C * dual_scale(p, d)) ** 2


class LinearLoss(LossFamily):
    """f(x; z) = <z, x> with ‖z‖_∞ <= bound."""

    kind = "linear"

    def __init__(self, bound: float = 1.0) -> None:
        if not bound > 0:
            raise DomainError(f"bound must be positive, got {bound}")
        self.bound = bound

    def batch_losses(self, x: Vector, features: NDArray[np.float64], targets: Vector | None) -> Vector:
        return np.asarray(x @ features)

    def batch_gradients(
        self, x: Vector, features: NDArray[np.float64], targets: Vector | None
    ) -> NDArray[np.float64]:
        return np.array(features)

    def lipschitz(self, p: float, d: int) -> float:
        return self.bound * dual_scale(p, d)

    def smoothness(self, p: float, d: int) -> float:
        return 0.0


class EntropicDemoLoss(LinearLoss):
    """Linear loss restricted to the probability simplex."""

    kind = "entropic_demo"


class RegularizedLoss(LossFamily):
    """F_i(x) = f(x; z) + w·‖x - center‖_p² with w = 1/(η_i·n_i·(p-1)).

    Relative to the phase mirror map h_i the regularizer equals h_i/(η_i·n_i),
    so F_i is (1/(η_i·n_i))-strongly convex relative to h_i.
    """

    def __init__(self, base: LossFamily, geometry: LpGeometry, eta: float, n: int) -> None:
        if not eta > 0 or n < 1:
            raise DomainError(f"need eta > 0 and n >= 1, got eta={eta}, n={n}")
        self.base = base
        self.geometry = geometry
        self.eta = eta
        self.n = n
        self.reg_weight = 1.0 / (eta * n * (geometry.p - 1.0))

    @property
    def kind(self) -> str:  # type: ignore[override]
        return f"regularized_{self.base.kind}"

    @property
    def reg_center(self) -> Vector:
        return self.geometry.center

    @property
    def strong_convexity(self) -> float:
        return 1.0 / (self.eta * self.n)

    def regularizer(self, x: ArrayLike) -> float:
        return self.reg_weight * lp_norm(as_vector(x) - self.reg_center, self.geometry.p) ** 2

    def regularizer_gradient(self, x: ArrayLike) -> Vector:
        return self.reg_weight * (self.geometry.p - 1.0) * self.geometry.gradient(x)

    def regularizer_gradient_norm(self, x: ArrayLike) -> float:
        """‖∇r(x)‖_q = 2·w·‖x - center‖_p."""
        return 2.0 * self.reg_weight * lp_norm(as_vector(x) - self.reg_center, self.geometry.p)

    def batch_losses(self, x: Vector, features: NDArray[np.float64], targets: Vector | None) -> Vector:
        return self.base.batch_losses(x, features, targets) + self.regularizer(x)

    def batch_gradients(
        self, x: Vector, features: NDArray[np.float64], targets: Vector | None
    ) -> NDArray[np.float64]:
        grads = self.base.batch_gradients(x, features, targets)
        return grads + self.regularizer_gradient(x)[:, None]

    def lipschitz(self, p: float, d: int) -> float:
        return self.base.lipschitz(p, d)

    def smoothness(self, p: float, d: int) -> float:
        return math.inf


def grad(family: LossFamily, x: ArrayLike, z: DataPoint) -> Vector:
    """Subgradient of f(·; z) at x."""
    return family.gradient(x, z)
