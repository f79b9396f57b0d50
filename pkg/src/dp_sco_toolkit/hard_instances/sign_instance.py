"""Sign hard instance: data on {±D/d}^d with the ℓ1-median loss.

These generators give parameterized families for empirical hardness curves.
They are not certified lower-bound instances.
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike

from dp_sco_toolkit.errors import DomainError, PreconditionError
from dp_sco_toolkit.geometry import FEASIBILITY_TOL, Vector, as_vector, lp_norm
from dp_sco_toolkit.losses import AbsL1Loss, Dataset, SignDistribution, empirical_loss, make_rng

logger = logging.getLogger(__name__)

BiasProfile = float | ArrayLike | Literal["uniform", "random", "adversarial"]

MEAN_RECOMPUTE_TOL = 1e-15


@dataclass(frozen=True, eq=False)
class SignInstance:
    """n points of {-D/d, +D/d}^d and their mean z̄."""

    dataset: Dataset
    D: float
    z_bar: Vector

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def d(self) -> int:
        return self.dataset.d

    @property
    def magnitude(self) -> float:
        return self.D / self.d


def sign(values: ArrayLike) -> Vector:
    """Sign with the convention sign(0) = +1."""
    arr = np.asarray(values, dtype=np.float64)
    return np.where(arr >= 0.0, 1.0, -1.0)


def resolve_bias(profile: BiasProfile, n: int, d: int, rng: np.random.Generator) -> Vector:
    """Per-coordinate P(z_j = +D/d).

    "random" draws the bias uniformly per coordinate; "adversarial" puts every
    coordinate at 1/2 ± 1/(2√n), where the sign of the mean is hardest to read.
    """
    if isinstance(profile, str):
        if profile == "uniform":
            return np.full(d, 0.5)
        if profile == "random":
            return rng.random(d)
        if profile == "adversarial":
            offsets = np.where(rng.random(d) < 0.5, -1.0, 1.0) / (2.0 * math.sqrt(n))
            return np.clip(0.5 + offsets, 0.0, 1.0)
        raise DomainError(f"unknown bias profile {profile!r}")
    return np.broadcast_to(np.asarray(profile, dtype=np.float64), (d,)).copy()


def gen_sign_instance(
    n: int,
    d: int,
    D: float,
    bias_profile: BiasProfile = 0.5,
    seed: int | None = None,
    *,
    paired: bool = False,
) -> SignInstance:
    """Seeded sign instance.

    Args:
        n: Number of points
        d: Dimension
        D: ℓ1 radius; coordinates are ±D/d
        bias_profile: P(+D/d) per coordinate, scalar, or a named profile
        seed: Generator seed
        paired: Emit n/2 points followed by their negations so z̄ = 0 exactly

    Raises:
        DomainError: If n or d < 1, or paired with odd n
    """
    if n < 1 or d < 1:
        raise DomainError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if paired and n % 2:
        raise DomainError(f"paired construction needs an even n, got {n}")
    rng = make_rng(seed)
    bias = resolve_bias(bias_profile, n, d, rng)
    distribution = SignDistribution(d=d, D=D, bias=bias)
    if paired:
        half = distribution.sample(n // 2, rng, seed).features
        features = np.concatenate([half, -half], axis=1)
    else:
        features = distribution.sample(n, rng, seed).features
    dataset = Dataset("sign", features, None, {"D": D}, seed)
    z_bar = features.mean(axis=1)
    if paired:
        z_bar = np.zeros(d)
    return SignInstance(dataset=dataset, D=D, z_bar=z_bar)


def sign_error(x_hat: ArrayLike, instance: SignInstance) -> float:
    """Σ_j |z̄_j|·1{sign(x̂_j) != sign(z̄_j)}."""
    x = _check_length(x_hat, instance)
    mismatch = sign(x) != sign(instance.z_bar)
    return float(np.abs(instance.z_bar)[mismatch].sum())


def l1_minimizer(instance: SignInstance) -> Vector:
    """x* = sign(z̄)·D/d, the minimizer of the ℓ1-median loss over the ℓ1 ball."""
    return sign(instance.z_bar) * instance.magnitude


def l1_minimum(instance: SignInstance, L: float) -> float:
    """min F̂ = L·Σ_j (D/d - |z̄_j|)."""
    return L * float(np.sum(instance.magnitude - np.abs(instance.z_bar)))


def l1_median_excess(x_hat: ArrayLike, instance: SignInstance, L: float) -> float:
    """Exact F̂(x̂) - min F̂ for f(x; z) = L·‖x - z‖₁ over the ℓ1 ball of radius D.

    Raises:
        PreconditionError: If ‖x̂‖₁ > D
    """
    x = _check_length(x_hat, instance)
    if lp_norm(x, 1.0) > instance.D + FEASIBILITY_TOL:
        raise PreconditionError(f"x_hat lies outside the l1 ball of radius {instance.D}")
    value = empirical_loss(AbsL1Loss(L), x, instance.dataset)
    return max(0.0, value - l1_minimum(instance, L))


def brute_force_l1_minimum(
    instance: SignInstance, L: float, resolution: float = 1e-3
) -> tuple[float, Vector]:
    """Grid minimum of F̂ over the ℓ1 ball, for small d.

    The grid spans [-D, D] per coordinate and contains ±D/d when the
    resolution divides D/d.

    Returns:
        Minimum value and one grid minimizer
    """
    d, D = instance.d, instance.D
    if d > 3:
        raise DomainError(f"grid search is limited to d <= 3, got {d}")
    points = int(round(2.0 * D / resolution)) + 1
    grid = np.linspace(-D, D, points)
    features = instance.dataset.features
    # per-coordinate loss on the grid: (d, points)
    tables = np.abs(grid[None, :, None] - features[:, None, :]).mean(axis=2)
    total = tables[0]
    radius = np.abs(grid)
    for j in range(1, d):
        total = np.add.outer(total, tables[j])
        radius = np.add.outer(radius, np.abs(grid))
    values = np.where(radius <= D + 1e-9, L * total, np.inf)
    flat = int(np.argmin(values))
    argmin = np.array([grid[k] for k in np.unravel_index(flat, values.shape)])
    return float(values.flat[flat]), argmin


def _check_length(x_hat: ArrayLike, instance: SignInstance) -> Vector:
    x = as_vector(x_hat, "x_hat")
    if x.shape[0] != instance.d:
        raise DomainError(f"x_hat has length {x.shape[0]}, instance has d = {instance.d}")
    return x
