"""Strongly convex reduction: restart a convex-case algorithm on growing stages."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Protocol

import numpy as np
from numpy.typing import ArrayLike

from dp_sco_toolkit.errors import DomainError, ParameterizationError
from dp_sco_toolkit.geometry import Vector, as_vector
from dp_sco_toolkit.losses import Dataset, make_rng
from dp_sco_toolkit.observability import traced
from dp_sco_toolkit.privacy import PrivacyBudget, PrivacyLedger

logger = logging.getLogger(__name__)


@dataclass
class StageOutcome:
    """What one inner run hands back to the wrapper."""

    x: Vector
    grad_count: int
    report: dict[str, Any] = field(default_factory=dict)


class InnerAlgorithm(Protocol):
    """Convex-case private algorithm usable as a wrapper stage."""

    name: str
    supports_reduction: bool

    def run_stage(
        self, dataset: Dataset, x0: Vector, budget: PrivacyBudget, seed: int
    ) -> StageOutcome: ...


@dataclass(frozen=True)
class StageSchedule:
    """k = ⌈log₂ log₂ n⌉ stages of n_i = ⌊2^{i-2}·n/log₂ n⌋ samples."""

    n: int
    sizes: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def total_samples(self) -> int:
        return sum(self.sizes)


def stage_schedule(n: int) -> StageSchedule:
    """Stage sizes for a dataset of n samples.

    Raises:
        ParameterizationError: If k < 1, some n_i < 1, or Σn_i > n
    """
    if n < 3:
        raise ParameterizationError(f"log2 log2 n >= 1 needs n >= 3, got {n}")
    log_n = math.log2(n)
    k = math.ceil(math.log2(log_n))
    if k < 1:
        raise ParameterizationError(f"k = ceil(log2 log2 n) >= 1 violated for n = {n}")
    sizes = tuple(math.floor(2.0 ** (i - 2) * n / log_n) for i in range(1, k + 1))
    if min(sizes) < 1:
        raise ParameterizationError(f"n_1 = floor(n / (2 log2 n)) >= 1 violated for n = {n}")
    if sum(sizes) > n:
        raise ParameterizationError(f"sum of stage sizes {sum(sizes)} exceeds n = {n}")
    return StageSchedule(n=n, sizes=sizes)


@dataclass
class ScheduledRun:
    """Nested report of a wrapper run."""

    inner: str
    mu: float
    schedule: StageSchedule
    stage_outputs: list[Vector] = field(default_factory=list, repr=False)
    stage_reports: list[dict[str, Any]] = field(default_factory=list)
    ledger: PrivacyLedger = field(default_factory=PrivacyLedger)
    grad_count: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "inner": self.inner,
            "mu": self.mu,
            "k": self.schedule.k,
            "stage_sizes": list(self.schedule.sizes),
            "stages": self.stage_reports,
            "grad_count": self.grad_count,
            "privacy": self.ledger.to_dict(),
            "stage_budget_note": "each stage spends the full (epsilon, delta); totals use basic composition",
        }


@traced("sc_wrapper")
def sc_wrapper(
    inner: InnerAlgorithm,
    dataset: Dataset,
    mu: float,
    budget: PrivacyBudget,
    x0: ArrayLike,
    *,
    seed: int = 0,
) -> tuple[Vector, ScheduledRun]:
    """Run ``inner`` for k stages on disjoint fresh slices, warm-starting each.

    Every stage receives the caller's (ε, δ). Stages see disjoint samples, so
    the ledger records each stage's budget and flags the basic-composition
    total k·ε as a conservative bound.

    Args:
        inner: Convex-case algorithm (localized mirror descent or tree Frank-Wolfe)
        dataset: Training sample
        mu: Strong convexity of the objective, recorded for the report
        budget: Per-stage (ε, δ)
        x0: Starting point of the first stage
        seed: Run seed (shuffle and stage seeds)

    Returns:
        Final stage output and the nested report

    Raises:
        ParameterizationError: If the stage schedule is infeasible for n
    """
    if not inner.supports_reduction:
        raise DomainError(f"{inner.name} cannot be used inside the strongly convex reduction")
    if not mu > 0:
        raise DomainError(f"strong convexity must be > 0, got {mu}")
    schedule = stage_schedule(dataset.n)
    x = as_vector(x0, "x0")
    order = make_rng(seed).permutation(dataset.n)
    run = ScheduledRun(inner=inner.name, mu=mu, schedule=schedule)
    cursor = 0

    logger.info(
        "Strongly convex reduction starting",
        extra={"inner": inner.name, "n": dataset.n, "stages": schedule.k, "mu": mu},
    )
    for i, size in enumerate(schedule.sizes, start=1):
        stage_data = dataset.subset(order[cursor : cursor + size])
        outcome = inner.run_stage(stage_data, x, budget, seed * 1_000_003 + i)
        x = np.asarray(outcome.x, dtype=np.float64)
        run.stage_outputs.append(x.copy())
        run.stage_reports.append(
            {"stage": i, "n": size, "slice": [cursor, cursor + size], **outcome.report}
        )
        run.grad_count += outcome.grad_count
        run.ledger.add(f"stage_{i}", budget.epsilon, budget.delta)
        cursor += size
        logger.info("Reduction stage finished", extra={"stage": i, "n": size})

    if schedule.k > 1:
        logger.warning(
            "Stages compose to a total budget above the per-stage epsilon",
            extra={"per_stage_epsilon": budget.epsilon, "total_epsilon": run.ledger.total_epsilon},
        )
    return x, run
