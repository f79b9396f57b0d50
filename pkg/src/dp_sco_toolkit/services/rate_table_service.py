"""Rate tables: median excess per swept-axis value and the fitted log-log slope."""

import logging
from collections import defaultdict
from pathlib import Path

import numpy as np

from dp_sco_toolkit.errors import DomainError, ParameterizationError
from dp_sco_toolkit.models.experiment_models import ResultRecord
from dp_sco_toolkit.models.rate_models import (
    THEORY_SLOPES,
    RateAxis,
    RateMetric,
    RateRow,
    RateTable,
)

logger = logging.getLogger(__name__)


def axis_value(record: ResultRecord, group_by: RateAxis) -> float:
    if group_by == "n_epsilon":
        return record.n * record.epsilon
    return float(getattr(record, group_by))


def theory_slope(theory: str | float | None) -> float | None:
    """Slope of a named theory rate, or the number itself.

    Raises:
        DomainError: For an unknown rate name
    """
    if theory is None or isinstance(theory, float | int):
        return None if theory is None else float(theory)
    if theory not in THEORY_SLOPES:
        known = ", ".join(sorted(THEORY_SLOPES))
        raise DomainError(f"unknown theory rate {theory!r} (known: {known})")
    return THEORY_SLOPES[theory]


def rate_table(
    records: list[ResultRecord],
    group_by: RateAxis,
    theory: str | float | None = None,
    metric: RateMetric = "excess_empirical",
) -> RateTable:
    """Median ``metric`` per value of ``group_by`` and its log-log slope.

    Failed records are left out and counted. The slope is the least-squares
    fit of log(median) against log(axis value).

    Raises:
        ParameterizationError: If fewer than 2 distinct axis values remain
        DomainError: If a group median is not positive
    """
    slope_reference = theory_slope(theory)
    groups: dict[float, list[float]] = defaultdict(list)
    skipped = 0
    for record in records:
        value = getattr(record, metric)
        if not record.success or value is None:
            skipped += 1
            continue
        groups[axis_value(record, group_by)].append(value)
    if len(groups) < 2:
        raise ParameterizationError(
            f"rate table needs >= 2 distinct {group_by} values, got {len(groups)}"
        )

    rows = [
        RateRow(axis_value=key, median_excess=float(np.median(values)), runs=len(values))
        for key, values in sorted(groups.items())
    ]
    medians = np.array([row.median_excess for row in rows])
    if np.any(medians <= 0):
        raise DomainError(f"log-log fit needs positive medians, got min {medians.min():.3e}")
    axis = np.array([row.axis_value for row in rows])
    slope, intercept = np.polyfit(np.log(axis), np.log(medians), 1)

    algorithms = {record.algorithm for record in records}
    table = RateTable(
        algorithm=algorithms.pop() if len(algorithms) == 1 else None,
        group_by=group_by,
        metric=metric,
        rows=rows,
        fitted_slope=float(slope),
        intercept=float(intercept),
        theory=None if theory is None else str(theory),
        theory_slope=slope_reference,
        skipped_failures=skipped,
    )
    logger.info(
        "Rate table fitted",
        extra={
            "group_by": group_by,
            "points": len(rows),
            "fitted_slope": table.fitted_slope,
            "theory_slope": slope_reference,
        },
    )
    if skipped:
        logger.warning(f"Rate table skipped {skipped} failed records")
    return table


def write_rate_table(table: RateTable, path: Path) -> bool:
    """Write ``table`` as indented JSON.

    Returns:
        bool: True if the write succeeded, False otherwise
    """
    try:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(table.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return True
    except OSError as e:
        logger.error(f"Failed to write rate table: {e}")  # pragma: no cover
        return False


def compare_to_theory(table: RateTable, tolerance: float) -> bool:
    """Whether the fitted slope is within ``tolerance`` of the theory slope.

    Raises:
        DomainError: If the table carries no theory slope or tolerance < 0
    """
    if tolerance < 0:
        raise DomainError(f"tolerance must be >= 0, got {tolerance}")
    gap = table.slope_gap
    if gap is None:
        raise DomainError("rate table has no theory slope to compare against")
    within = abs(gap) <= tolerance
    if not within:
        logger.warning(
            f"Fitted slope {table.fitted_slope:+.4f} is {abs(gap):.4f} away from "
            f"{table.theory} ({table.theory_slope:+.4f}), tolerance {tolerance}"
        )
    return within
