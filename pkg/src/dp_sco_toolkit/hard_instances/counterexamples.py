"""Entropic mirror descent is not contractive, yet stable on linear losses."""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import rel_entr

from dp_sco_toolkit.errors import DomainError
from dp_sco_toolkit.geometry import Vector, as_vector, entropic_md_step, lp_norm
from dp_sco_toolkit.losses import DataPoint, Dataset, LinearDistribution, make_rng, spawn_rngs

logger = logging.getLogger(__name__)


def counterexample_size(eta: float) -> int:
    """n = ⌈100(e^η - 1)/η⌉."""
    return math.ceil(100.0 * math.expm1(eta) / eta)


def md_counterexample_check(eta: float) -> tuple[float, float]:
    """One entropic step on f(x) = -x₂ - x₃ from two nearby simplex points.

    Starts from x₀ = (1 - 3/n, 1/n, 2/n) and y₀ = (1 - 3/n, 2/n, 1/n) and
    returns the growth of their ℓ1 distance and of KL(x‖y). Both exceed
    1 + η/4.

    Raises:
        DomainError: If eta is outside (0, 1]
    """
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"eta must lie in (0, 1], got {eta}")
    n = counterexample_size(eta)
    x0 = np.array([1.0 - 3.0 / n, 1.0 / n, 2.0 / n])
    y0 = np.array([1.0 - 3.0 / n, 2.0 / n, 1.0 / n])
    g = np.array([0.0, -1.0, -1.0])
    x1 = entropic_md_step(x0, g, eta)
    y1 = entropic_md_step(y0, g, eta)
    ratio_l1 = lp_norm(x1 - y1, 1.0) / lp_norm(x0 - y0, 1.0)
    ratio_kl = float(rel_entr(x1, y1).sum() / rel_entr(x0, y0).sum())
    logger.debug(
        "Counterexample evaluated", extra={"eta": eta, "n": n, "ratio_l1": ratio_l1, "ratio_kl": ratio_kl}
    )
    return ratio_l1, ratio_kl


@dataclass
class ShuffledRun:
    """Last iterate and running average of a shuffled SMD run."""

    x_last: Vector
    x_avg: Vector
    steps: int
    permutations: list[np.ndarray] = field(default_factory=list, repr=False)


def run_shuffled_smd(
    dataset: Dataset,
    eta: float,
    rounds: int,
    x0: ArrayLike | None = None,
    seed: int | None = 0,
) -> ShuffledRun:
    """Stochastic entropic mirror descent over R passes, each on a fresh permutation.

    The loss is linear, f(x; z) = <z, x>, so the gradient at step i is the
    sampled z. Permutations depend only on (seed, n), so two datasets of the
    same size share them.
    """
    if rounds < 1:
        raise DomainError(f"rounds must be >= 1, got {rounds}")
    if dataset.n == 0:
        raise DomainError("shuffled mirror descent needs a non-empty dataset")
    d = dataset.d
    x = np.full(d, 1.0 / d) if x0 is None else as_vector(x0, "x0")
    rng = make_rng(seed)
    total = np.zeros(d)
    run = ShuffledRun(x_last=x, x_avg=x, steps=0)
    for _ in range(rounds):
        order = rng.permutation(dataset.n)
        run.permutations.append(order)
        for i in order:
            x = entropic_md_step(x, dataset.features[:, i], eta)
            total += x
            run.steps += 1
    run.x_last = x
    run.x_avg = total / run.steps
    return run


def stability_bound(eta: float, L: float, R: int) -> float:
    """4·η²·L²·R²."""
    return 4.0 * eta**2 * L**2 * R**2


def md_linear_stability_check(
    n: int,
    d: int,
    R: int,
    eta: float,
    L: float,
    seed: int | None,
    *,
    replace: bool = True,
) -> float:
    """‖x_T - y_T‖₁² for shuffled SMD on neighboring linear datasets.

    Data z ∈ [-L, L]^d; the neighbor swaps one seeded index for a fresh point.
    Both runs use the same permutations. Compare with :func:`stability_bound`.
    """
    if not (eta > 0 and L > 0):
        raise DomainError(f"need eta > 0 and L > 0, got eta={eta}, L={L}")
    data_rng, swap_rng = spawn_rngs(seed, 2)
    distribution = LinearDistribution(d=d, bound=L)
    dataset = distribution.sample(n, data_rng, seed)
    neighbor = dataset
    if replace:
        index = int(swap_rng.integers(n))
        fresh = distribution.sample(1, swap_rng).features[:, 0]
        neighbor = dataset.replace_point(index, DataPoint(z=fresh))
    x_run = run_shuffled_smd(dataset, eta, R, seed=seed)
    y_run = run_shuffled_smd(neighbor, eta, R, seed=seed)
    divergence = lp_norm(x_run.x_last - y_run.x_last, 1.0) ** 2
    bound = stability_bound(eta, L, R)
    if divergence > bound:  # pragma: no cover
        logger.warning("Stability bound exceeded", extra={"divergence": divergence, "bound": bound})
    return divergence
