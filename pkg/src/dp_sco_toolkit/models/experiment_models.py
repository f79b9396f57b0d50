"""Experiment configuration and result records.

An ExperimentConfig is the JSON file handed to ``dp-sco-bench run``. It expands
into one RunSpec per (n, d, ε, seed) grid point; every executed RunSpec yields
one ResultRecord line in the result file.
"""

from collections.abc import Iterator
from enum import Enum
from itertools import product
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from dp_sco_toolkit.privacy.calibration import DEFAULT_SIGMA_CONSTANT

SCHEMA_VERSION = 1
DEFAULT_BASELINE_MAX_ITERATIONS = 20_000
DEFAULT_BASELINE_TOLERANCE = 1e-7


class AlgorithmName(str, Enum):
    """Algorithms the benchmark can run."""

    NOISY_MD = "noisy-md"
    LOCALIZED_MD = "localized-md"
    TREE_FW = "tree-fw"
    SC_WRAPPER = "sc-wrapper"


class BudgetStatus(str, Enum):
    """Whether the recorded (ε, δ) was enforced or only echoed."""

    ENFORCED = "enforced"
    NOMINAL = "nominal"


class InstanceSpec(BaseModel):
    """Loss family and generator parameters."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: Literal["linear", "quadratic", "sign"] = Field(..., description="Loss family tag")
    bound: float = Field(default=1.0, gt=0, description="‖z‖_∞ bound of the linear family")
    nonnegative: bool = Field(default=False, description="Draw linear data from [0, bound]^d")
    C: float = Field(default=1.0, gt=0, description="‖a‖_∞ bound of the quadratic family")
    noise: float = Field(default=0.1, ge=0, description="Target noise level of the quadratic family")
    bias: float = Field(default=0.75, ge=0, le=1, description="P(+D/d) of the sign family")
    scale: float = Field(default=1.0, gt=0, description="Lipschitz scale L of the sign family")


class GeometrySpec(BaseModel):
    """Norm of the constraint set and its radius."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    norm: Literal["l1", "lp"] = Field(default="l1", description="ℓ1 ball or ℓp ball")
    p: float | None = Field(default=None, gt=1, le=2, description="Exponent of the ℓp ball")
    D: float = Field(default=1.0, gt=0, description="Radius of the constraint set")

    @model_validator(mode="after")
    def check_exponent(self) -> "GeometrySpec":
        """An ℓp ball needs its exponent."""
        if self.norm == "lp" and self.p is None:
            raise ValueError("geometry.p is required when geometry.norm is 'lp'")
        return self


class BudgetGrid(BaseModel):
    """Privacy budgets to sweep."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    epsilons: list[float] = Field(..., min_length=1, description="ε values")
    delta: float = Field(default=1e-6, gt=0, lt=1, description="δ shared by every run")

    @field_validator("epsilons")
    @classmethod
    def validate_epsilons(cls, v: list[float]) -> list[float]:
        """Every ε must be positive."""
        if any(epsilon <= 0 for epsilon in v):
            raise ValueError("every epsilon must be positive")
        return v


class AlgorithmOptions(BaseModel):
    """Optional overrides of the theory-default schedules."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    iterations: int | None = Field(default=None, ge=1, description="Noisy MD iterations T")
    batch_size: int | None = Field(default=None, ge=1, description="Noisy MD / tree FW batch b")
    step: float | None = Field(default=None, gt=0, description="Noisy MD or localization base step")
    phases: int | None = Field(default=None, ge=1, description="Tree FW phases T")
    fw_mode: Literal["pure", "approx"] = Field(default="pure", description="Tree FW noise mode")
    mu: float | None = Field(default=None, gt=0, description="Strong convexity for sc-wrapper")
    inner: Literal["localized-md", "tree-fw"] | None = Field(
        default=None, description="Inner algorithm of sc-wrapper"
    )


class RunSpec(BaseModel):
    """Everything needed to execute and reproduce one benchmark run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    algorithm: AlgorithmName
    instance: InstanceSpec
    geometry: GeometrySpec
    options: AlgorithmOptions = Field(default_factory=AlgorithmOptions)
    n: int = Field(..., ge=1)
    d: int = Field(..., ge=1)
    epsilon: float = Field(..., gt=0)
    delta: float = Field(..., gt=0, lt=1)
    seed: int = Field(..., ge=0)
    non_private: bool = False
    population_samples: int = Field(default=100_000, ge=1)
    sigma_constant: float = Field(default=DEFAULT_SIGMA_CONSTANT, gt=0)
    baseline_max_iterations: int = Field(default=DEFAULT_BASELINE_MAX_ITERATIONS, ge=1)
    baseline_tolerance: float = Field(default=DEFAULT_BASELINE_TOLERANCE, gt=0)

    @property
    def budget_status(self) -> BudgetStatus:
        return BudgetStatus.NOMINAL if self.non_private else BudgetStatus.ENFORCED

    @property
    def run_id(self) -> str:
        return f"{self.algorithm.value}:n={self.n}:d={self.d}:eps={self.epsilon:g}:seed={self.seed}"


class ExperimentConfig(BaseModel):
    """Versioned benchmark configuration file."""

    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = Field(..., description="Config schema version")
    algorithm: AlgorithmName = Field(..., description="Algorithm to run")
    instance: InstanceSpec = Field(..., description="Loss family and generator")
    geometry: GeometrySpec = Field(default_factory=GeometrySpec, description="Constraint set")
    budget: BudgetGrid = Field(..., description="Privacy budget grid")
    n_values: list[int] = Field(..., min_length=1, description="Sample sizes")
    d_values: list[int] = Field(..., min_length=1, description="Dimensions")
    seeds: list[int] = Field(..., min_length=1, description="Run seeds")
    options: AlgorithmOptions = Field(default_factory=AlgorithmOptions)
    output: Path | None = Field(default=None, description="Result file (NDJSON)")
    csv_mirror: bool = Field(default=False, description="Also write a CSV copy of the results")
    non_private: bool = Field(default=False, description="Disable all noise")
    population_samples: int | None = Field(
        default=None, ge=1, description="Fresh samples for population estimates"
    )

    @field_validator("n_values", "d_values")
    @classmethod
    def validate_sizes(cls, v: list[int]) -> list[int]:
        """Grid sizes must be positive."""
        if any(value < 1 for value in v):
            raise ValueError("grid sizes must be >= 1")
        return v

    @field_validator("seeds")
    @classmethod
    def validate_seeds(cls, v: list[int]) -> list[int]:
        """Seeds must be non-negative."""
        if any(seed < 0 for seed in v):
            raise ValueError("seeds must be >= 0")
        return v

    @model_validator(mode="after")
    def check_algorithm_options(self) -> "ExperimentConfig":
        """Cross-field rules between the algorithm and its options."""
        if self.algorithm == AlgorithmName.SC_WRAPPER and self.options.inner is None:
            raise ValueError("options.inner is required for sc-wrapper")
        if self.algorithm == AlgorithmName.TREE_FW and self.geometry.norm != "l1":
            raise ValueError("tree-fw needs the l1 ball (an explicit vertex list)")
        if self.algorithm == AlgorithmName.TREE_FW and self.instance.family == "sign":
            raise ValueError("tree-fw needs a smooth loss family")
        return self

    def runs(
        self,
        population_samples: int,
        *,
        sigma_constant: float = DEFAULT_SIGMA_CONSTANT,
        baseline_max_iterations: int = DEFAULT_BASELINE_MAX_ITERATIONS,
        baseline_tolerance: float = DEFAULT_BASELINE_TOLERANCE,
    ) -> Iterator[RunSpec]:
        """Expand the grid in (n, d, ε, seed) order.

        The keyword values are frozen into every RunSpec, so a record re-runs
        with the constants it was produced with.
        """
        samples = self.population_samples or population_samples
        for n, d, epsilon, seed in product(
            self.n_values, self.d_values, self.budget.epsilons, self.seeds
        ):
            yield RunSpec(
                algorithm=self.algorithm,
                instance=self.instance,
                geometry=self.geometry,
                options=self.options,
                n=n,
                d=d,
                epsilon=epsilon,
                delta=self.budget.delta,
                seed=seed,
                non_private=self.non_private,
                population_samples=samples,
                sigma_constant=sigma_constant,
                baseline_max_iterations=baseline_max_iterations,
                baseline_tolerance=baseline_tolerance,
            )

    @property
    def grid_size(self) -> int:
        return (
            len(self.n_values) * len(self.d_values) * len(self.budget.epsilons) * len(self.seeds)
        )


class ResultRecord(BaseModel):
    """One result line.

    ``param_dump`` holds the RunSpec under "spec" plus every derived schedule
    value, so the run can be re-executed exactly.
    """

    model_config = ConfigDict(use_enum_values=True)

    run_id: str = Field(..., description="Grid point identifier")
    algorithm: str = Field(..., description="Algorithm name")
    n: int = Field(..., ge=1)
    d: int = Field(..., ge=1)
    p: float | None = Field(None, description="Norm exponent used by the algorithm")
    epsilon: float = Field(..., gt=0)
    delta: float = Field(..., gt=0, lt=1)
    seed: int = Field(..., ge=0)
    success: bool = Field(..., description="Whether the run completed")
    excess_empirical: float | None = Field(None, description="F̂(x̂) - min F̂")
    excess_population_est: float | None = Field(None, description="Estimate of F(x̂) - min F")
    population_stderr: float | None = Field(None, ge=0, description="Std. error of the estimate")
    grad_count: int | None = Field(None, description="Gradient evaluations")
    wall_ms: float = Field(..., ge=0, description="Wall-clock time of the run")
    param_dump: dict[str, Any] = Field(default_factory=dict, description="Spec and schedule values")
    non_private: bool = Field(default=False)
    budget_status: BudgetStatus = Field(default=BudgetStatus.ENFORCED)
    error_type: str | None = Field(None, description="Exception class of a failed run")
    error_message: str | None = Field(None, description="Error annotation of a failed run")

    @field_validator("grad_count")
    @classmethod
    def validate_grad_count(cls, v: int | None) -> int | None:
        """A recorded gradient count is positive."""
        if v is not None and v <= 0:
            raise ValueError("grad_count must be positive")
        return v

    @model_validator(mode="after")
    def check_success_fields(self) -> "ResultRecord":
        """Successful runs carry their metrics; failed runs carry an error."""
        if self.success and (self.grad_count is None or self.excess_empirical is None):
            raise ValueError("a successful run needs grad_count and excess_empirical")
        if not self.success and self.error_message is None:
            raise ValueError("a failed run needs an error_message")
        return self

    def spec(self) -> RunSpec:
        """RunSpec stored in the param dump."""
        return RunSpec.model_validate(self.param_dump["spec"])
