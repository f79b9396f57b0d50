"""Seeded noise sources and report-noisy-max."""

import logging
from collections import Counter

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dp_sco_toolkit.errors import DomainError
from dp_sco_toolkit.geometry import Vector, as_vector
from dp_sco_toolkit.observability.metrics import record_noise_draws

logger = logging.getLogger(__name__)


class NoiseSource:
    """Counter-based (Philox) noise stream owned by a single run.

    Every call draws from the stream in call order and is counted per
    mechanism, so runs can be audited for the exact number of draws.
    """

    def __init__(self, seed: int | None = None, rng: np.random.Generator | None = None) -> None:
        self.rng = rng if rng is not None else np.random.Generator(np.random.Philox(seed))
        self.draws: Counter[str] = Counter()

    def gaussian_vectors(self, count: int, d: int, sigma: float) -> NDArray[np.float64]:
        """``count`` i.i.d. N(0, σ²I_d) vectors as a (d, count) block."""
        if sigma < 0:
            raise DomainError(f"sigma must be >= 0, got {sigma}")
        if sigma == 0.0:
            return np.zeros((d, count))
        self.draws["gaussian"] += count
        record_noise_draws("gaussian", count)
        return self.rng.normal(0.0, sigma, size=(count, d)).T

    def laplace(self, size: int, scale: float) -> Vector:
        """``size`` i.i.d. Laplace(scale) scalars."""
        if scale < 0:
            raise DomainError(f"scale must be >= 0, got {scale}")
        if scale == 0.0:
            return np.zeros(size)
        self.draws["laplace"] += size
        record_noise_draws("laplace", size)
        return self.rng.laplace(0.0, scale, size=size)


def report_noisy_max(scores: ArrayLike, laplace_scale: float, rng: NoiseSource) -> int:
    """Index minimizing score_i + ζ_i with ζ_i i.i.d. Laplace(scale).

    A zero scale returns the exact argmin, first index on ties.
    """
    values = as_vector(scores, "scores")
    if values.size == 0:
        raise DomainError("report noisy max needs at least one score")
    if laplace_scale == 0.0:
        return int(np.argmin(values))
    return int(np.argmin(values + rng.laplace(values.size, laplace_scale)))
