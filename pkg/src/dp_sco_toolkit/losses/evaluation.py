"""Empirical and Monte-Carlo population loss evaluation."""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from dp_sco_toolkit.errors import DomainError
from dp_sco_toolkit.losses.datasets import Dataset, Distribution, make_rng
from dp_sco_toolkit.losses.families import LossFamily

logger = logging.getLogger(__name__)

POPULATION_CHUNK = 20_000


@dataclass
class PopulationEstimate:
    """Monte-Carlo population loss.

    Attributes:
        mean: Sample mean of f(x; z) over fresh draws
        stderr: Standard error of the mean (0 for a single draw)
        n_eval: Number of draws
    """

    mean: float
    stderr: float
    n_eval: int


def empirical_loss(family: LossFamily, x: ArrayLike, dataset: Dataset) -> float:
    """Exact mean loss F̂(x; S).

    Raises:
        DomainError: If the dataset is empty
    """
    if dataset.n == 0:
        raise DomainError("empirical loss of an empty dataset is undefined")
    return float(family.losses(x, dataset).mean())


def population_loss_estimate(
    family: LossFamily,
    x: ArrayLike,
    distribution: Distribution,
    n_eval: int,
    seed: int | None,
) -> PopulationEstimate:
    """Estimate F(x) = E[f(x; z)] from n_eval fresh samples.

    Samples are drawn in chunks so large n_eval stays within memory.

    Args:
        family: Loss family
        x: Evaluation point
        distribution: Data-generating distribution
        n_eval: Number of fresh samples, >= 1
        seed: Seed of the evaluation stream

    Returns:
        Mean with its standard error
    """
    return _monte_carlo(lambda sample: family.losses(x, sample), distribution, n_eval, seed)


def population_excess_estimate(
    family: LossFamily,
    x: ArrayLike,
    reference: ArrayLike,
    distribution: Distribution,
    n_eval: int,
    seed: int | None,
) -> PopulationEstimate:
    """Estimate F(x) - F(reference) from paired fresh samples.

    Both points are evaluated on the same draws, so the standard error is that
    of the per-sample difference.
    """
    return _monte_carlo(
        lambda sample: family.losses(x, sample) - family.losses(reference, sample),
        distribution,
        n_eval,
        seed,
    )


def _monte_carlo(
    values_of: Callable[[Dataset], np.ndarray],
    distribution: Distribution,
    n_eval: int,
    seed: int | None,
) -> PopulationEstimate:
    if n_eval < 1:
        raise DomainError(f"n_eval must be >= 1, got {n_eval}")
    rng = make_rng(seed)
    total = 0.0
    total_sq = 0.0
    remaining = n_eval
    while remaining:
        size = min(remaining, POPULATION_CHUNK)
        values = values_of(distribution.sample(size, rng))
        total += float(values.sum())
        total_sq += float(np.square(values).sum())
        remaining -= size
    mean = total / n_eval
    if n_eval == 1:
        return PopulationEstimate(mean=mean, stderr=0.0, n_eval=1)
    variance = max(total_sq - n_eval * mean**2, 0.0) / (n_eval - 1)
    return PopulationEstimate(mean=mean, stderr=math.sqrt(variance / n_eval), n_eval=n_eval)
