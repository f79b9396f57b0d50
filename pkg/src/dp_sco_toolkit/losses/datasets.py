"""Datasets, data points, synthetic generators and the dataset file format."""

import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, Field

from dp_sco_toolkit.errors import DomainError
from dp_sco_toolkit.geometry import Vector, as_vector

logger = logging.getLogger(__name__)

Indices = NDArray[np.intp] | slice | None


@dataclass(frozen=True)
class DataPoint:
    """A single sample: feature vector z (or a) and an optional scalar target b.

    Attributes:
        z: Feature vector
        b: Target for the quadratic family, None otherwise
    """

    z: Vector
    b: float | None = None


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable sample block stored column-major as a (d, n) matrix.

    Attributes:
        family: Family tag ("quadratic", "linear", "sign", ...)
        features: Column-major (d, n) feature block
        targets: Per-sample targets (quadratic family) or None
        constants: Generator constants (C, D, bound, ...)
        seed: Seed the data was generated from, if any
    """

    family: str
    features: NDArray[np.float64] = field(repr=False)
    targets: Vector | None = field(default=None, repr=False)
    constants: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self) -> None:
        features = np.asfortranarray(self.features, dtype=np.float64)
        if features.ndim != 2:
            raise DomainError(f"features must be a (d, n) matrix, got shape {features.shape}")
        if not np.all(np.isfinite(features)):
            raise DomainError("features contain non-finite entries")
        features.setflags(write=False)
        object.__setattr__(self, "features", features)
        if self.targets is not None:
            targets = np.asarray(self.targets, dtype=np.float64).reshape(-1)
            if targets.shape[0] != features.shape[1]:
                raise DomainError(
                    f"{targets.shape[0]} targets for {features.shape[1]} samples"
                )
            targets.setflags(write=False)
            object.__setattr__(self, "targets", targets)

    @property
    def d(self) -> int:
        return int(self.features.shape[0])

    @property
    def n(self) -> int:
        return int(self.features.shape[1])

    def __len__(self) -> int:
        return self.n

    def point(self, i: int) -> DataPoint:
        b = None if self.targets is None else float(self.targets[i])
        return DataPoint(z=np.array(self.features[:, i]), b=b)

    def columns(self, indices: Indices = None) -> tuple[NDArray[np.float64], Vector | None]:
        """Feature block and targets restricted to ``indices`` (all samples if None)."""
        if indices is None:
            return self.features, self.targets
        targets = None if self.targets is None else self.targets[indices]
        return self.features[:, indices], targets

    def subset(self, indices: ArrayLike) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        features, targets = self.columns(idx)
        return Dataset(self.family, features, targets, dict(self.constants), self.seed)

    def replace_point(self, i: int, point: DataPoint) -> "Dataset":
        """Neighboring dataset with sample i replaced."""
        features = np.array(self.features)
        features[:, i] = as_vector(point.z, "z")
        targets = None
        if self.targets is not None:
            targets = np.array(self.targets)
            targets[i] = 0.0 if point.b is None else point.b
        return Dataset(self.family, features, targets, dict(self.constants), self.seed)

    @classmethod
    def from_points(cls, family: str, points: list[DataPoint], d: int) -> "Dataset":
        features = np.zeros((d, len(points)), order="F")
        for i, point in enumerate(points):
            features[:, i] = point.z
        targets = None
        if points and points[0].b is not None:
            targets = np.array([float(point.b or 0.0) for point in points])
        return cls(family, features, targets)


def make_rng(seed: int | None) -> np.random.Generator:
    """Seeded counter-based generator used for every stream in the toolkit."""
    return np.random.Generator(np.random.Philox(seed))


def gen_quadratic_instance(n: int, d: int, C: float, D: float, seed: int | None) -> Dataset:
    """Quadratic-family sample with a_i ~ U[-C, C]^d and b_i ~ U[-C·D, C·D].

    The box is sampled uniformly; the constants are bounds, not claimed tight.

    Args:
        n: Number of samples (0 gives an empty dataset)
        d: Dimension
        C: Bound on ‖a_i‖_∞
        D: ℓ1 radius of the domain, |b_i| <= C·D
        seed: Seed for the generator stream

    Returns:
        Dataset tagged "quadratic"
    """
    if not (C > 0 and D > 0):
        raise DomainError(f"C and D must be positive, got C={C}, D={D}")
    if n < 0 or d < 1:
        raise DomainError(f"need n >= 0 and d >= 1, got n={n}, d={d}")
    rng = make_rng(seed)
    features = rng.uniform(-C, C, size=(d, n))
    targets = rng.uniform(-C * D, C * D, size=n)
    return Dataset("quadratic", features, targets, {"C": C, "D": D}, seed)


def gen_linear_instance(
    n: int, d: int, bound: float, seed: int | None, nonnegative: bool = False
) -> Dataset:
    """Linear-family sample with z_i uniform in [-bound, bound]^d (or [0, bound]^d)."""
    return LinearDistribution(d=d, bound=bound, nonnegative=nonnegative).sample(n, make_rng(seed), seed)


class Distribution:
    """Seeded data-generating distribution for population-loss estimates."""

    family = "generic"

    def __init__(self, d: int) -> None:
        if d < 1:
            raise DomainError(f"dimension must be >= 1, got {d}")
        self.d = d

    def sample(self, n: int, rng: np.random.Generator, seed: int | None = None) -> Dataset:
        raise NotImplementedError

    def population_gradient(self, x: ArrayLike) -> Vector:
        """Exact ∇F(x) when the family admits a closed form."""
        raise NotImplementedError(f"{type(self).__name__} has no closed-form population gradient")

    def population_minimizer(self) -> Vector:
        raise NotImplementedError(f"{type(self).__name__} has no closed-form population minimizer")


class QuadraticDistribution(Distribution):
    """a ~ U[-C, C]^d, b = <a, x_plant> + clipped Gaussian noise.

    With ‖x_plant‖₁ <= D/2 and noise clipped to C·D/2 every sample satisfies
    |b| <= C·D. The population loss is (C²/3)‖x - x_plant‖₂² + E[ξ²].
    """

    family = "quadratic"

    def __init__(self, d: int, C: float, D: float, x_plant: ArrayLike, noise: float = 0.1) -> None:
        super().__init__(d)
        if not (C > 0 and D > 0):
            raise DomainError(f"C and D must be positive, got C={C}, D={D}")
        plant = as_vector(x_plant, "x_plant")
        if plant.shape[0] != d:
            raise DomainError(f"planted point has dimension {plant.shape[0]}, expected {d}")
        if np.abs(plant).sum() > D / 2 + 1e-12:
            raise DomainError("planted point must satisfy ‖x_plant‖₁ <= D/2")
        if noise < 0:
            raise DomainError(f"noise must be >= 0, got {noise}")
        self.C = C
        self.D = D
        self.x_plant = plant
        self.noise = noise

    def sample(self, n: int, rng: np.random.Generator, seed: int | None = None) -> Dataset:
        features = rng.uniform(-self.C, self.C, size=(self.d, n))
        bound = self.C * self.D / 2
        xi = np.clip(self.noise * rng.standard_normal(n), -bound, bound)
        targets = self.x_plant @ features + xi
        constants = {"C": self.C, "D": self.D, "noise": self.noise}
        return Dataset("quadratic", features, targets, constants, seed)

    def population_gradient(self, x: ArrayLike) -> Vector:
        return (2.0 * self.C**2 / 3.0) * (as_vector(x) - self.x_plant)

    def population_minimizer(self) -> Vector:
        return self.x_plant.copy()


class LinearDistribution(Distribution):
    """z uniform in [mean - spread, mean + spread] with ‖z‖_∞ <= bound.

    The default is the symmetric box [-bound, bound]^d; ``nonnegative`` uses
    [0, bound]^d.
    """

    family = "linear"

    def __init__(
        self,
        d: int,
        bound: float = 1.0,
        nonnegative: bool = False,
        mean: ArrayLike | None = None,
    ) -> None:
        super().__init__(d)
        if not bound > 0:
            raise DomainError(f"bound must be positive, got {bound}")
        if mean is not None:
            center = as_vector(mean, "mean")
            if np.any(np.abs(center) > bound):
                raise DomainError("mean must lie inside the bounding box")
        elif nonnegative:
            center = np.full(d, bound / 2)
        else:
            center = np.zeros(d)
        self.bound = bound
        self.nonnegative = nonnegative
        self.mean = center
        self.spread = bound - np.abs(center)

    def sample(self, n: int, rng: np.random.Generator, seed: int | None = None) -> Dataset:
        noise = rng.uniform(-1.0, 1.0, size=(self.d, n))
        features = self.mean[:, None] + self.spread[:, None] * noise
        constants = {"bound": self.bound, "nonnegative": self.nonnegative}
        return Dataset("linear", features, None, constants, seed)

    def population_gradient(self, x: ArrayLike) -> Vector:
        return self.mean.copy()


class SignDistribution(Distribution):
    """z_j = +D/d with probability bias_j, else -D/d."""

    family = "sign"

    def __init__(self, d: int, D: float, bias: ArrayLike | float = 0.5) -> None:
        super().__init__(d)
        if not D > 0:
            raise DomainError(f"D must be positive, got {D}")
        profile = np.broadcast_to(np.asarray(bias, dtype=np.float64), (d,)).copy()
        if np.any((profile < 0) | (profile > 1)):
            raise DomainError("bias profile must lie in [0, 1]")
        self.D = D
        self.bias = profile

    @property
    def magnitude(self) -> float:
        return self.D / self.d

    def sample(self, n: int, rng: np.random.Generator, seed: int | None = None) -> Dataset:
        positive = rng.random(size=(self.d, n)) < self.bias[:, None]
        features = np.where(positive, self.magnitude, -self.magnitude)
        return Dataset("sign", features, None, {"D": self.D}, seed)

    def mean(self) -> Vector:
        return self.magnitude * (2.0 * self.bias - 1.0)


class DatasetHeader(BaseModel):
    """First line of a dataset file."""

    family: str = Field(description="Loss family tag")
    n: int = Field(ge=0, description="Number of samples")
    d: int = Field(ge=1, description="Dimension")
    constants: dict[str, Any] = Field(default_factory=dict, description="Generator constants")
    seed: int | None = Field(default=None, description="Generator seed")
    has_targets: bool = Field(default=False, description="Whether rows end with a target b")


def save_dataset(dataset: Dataset, path: Path) -> None:
    """Write a JSON header line followed by one comma-separated row per sample.

    Values carry 17 significant digits so the loader round-trips exactly.
    """
    header = DatasetHeader(
        family=dataset.family,
        n=dataset.n,
        d=dataset.d,
        constants=dataset.constants,
        seed=dataset.seed,
        has_targets=dataset.targets is not None,
    )
    rows = dataset.features.T
    if dataset.targets is not None:
        rows = np.column_stack([rows, dataset.targets])
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        handle.write(header.model_dump_json() + "\n")
        if dataset.n:
            np.savetxt(handle, rows, fmt="%.17g", delimiter=",")
    logger.info(f"Saved dataset to {path}", extra={"n": dataset.n, "d": dataset.d})


def load_dataset(path: Path) -> Dataset:
    """Read a dataset written by :func:`save_dataset`."""
    with path.open("r", encoding="utf-8") as handle:
        header = DatasetHeader.model_validate_json(handle.readline())
        body = handle.read()
    width = header.d + (1 if header.has_targets else 0)
    if header.n == 0:
        rows = np.zeros((0, width))
    else:
        rows = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
    if rows.shape != (header.n, width):
        raise DomainError(f"dataset body has shape {rows.shape}, header promises {(header.n, width)}")
    features = rows[:, : header.d].T
    targets = rows[:, header.d] if header.has_targets else None
    return Dataset(header.family, features, targets, header.constants, header.seed)


def spawn_rngs(seed: int | None, count: int) -> list[np.random.Generator]:
    """Independent child streams (sampling, noise, ...) derived from one run seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(child)) for child in children]
