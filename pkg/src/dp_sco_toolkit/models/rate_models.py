"""Rate table models: median excess per group and a fitted log-log slope."""

from typing import Literal

from pydantic import BaseModel, Field

RateAxis = Literal["n", "d", "epsilon", "n_epsilon"]
RateMetric = Literal["excess_empirical", "excess_population_est"]

THEORY_SLOPES: dict[str, float] = {
    "statistical": -0.5,
    "smooth_private": -2.0 / 3.0,
    "l2_private": -1.0,
    "sqrt_d": 0.5,
}


class RateRow(BaseModel):
    """Median excess at one axis value."""

    axis_value: float = Field(..., gt=0, description="Value of the swept axis")
    median_excess: float = Field(..., description="Median of the metric over the group")
    runs: int = Field(..., ge=1, description="Records in the group")


class RateTable(BaseModel):
    """Rate table for one sweep."""

    algorithm: str | None = Field(None, description="Algorithm of the records, when unique")
    group_by: RateAxis = Field(..., description="Swept axis")
    metric: RateMetric = Field(default="excess_empirical")
    rows: list[RateRow] = Field(..., min_length=2)
    fitted_slope: float = Field(..., description="Least-squares slope of log median vs log axis")
    intercept: float = Field(..., description="Intercept of the log-log fit")
    theory: str | None = Field(None, description="Name of the theory rate")
    theory_slope: float | None = Field(None, description="Slope predicted by the theory rate")
    skipped_failures: int = Field(default=0, ge=0, description="Failed records left out")

    @property
    def slope_gap(self) -> float | None:
        if self.theory_slope is None:
            return None
        return self.fitted_slope - self.theory_slope
