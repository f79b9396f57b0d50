"""Unit tests for experiment config and result models."""

from typing import Any

import pytest
from pydantic import ValidationError

from dp_sco_toolkit.models.experiment_models import (
    AlgorithmName,
    BudgetStatus,
    ExperimentConfig,
    GeometrySpec,
    ResultRecord,
)
from dp_sco_toolkit.models.rate_models import RateRow, RateTable


@pytest.mark.unit
class TestExperimentConfig:
    """Test suite for ExperimentConfig."""

    def test_valid_payload(self, experiment_payload: dict[str, Any]) -> None:
        """Test parsing a minimal config."""
        config = ExperimentConfig.model_validate(experiment_payload)

        assert config.algorithm == AlgorithmName.NOISY_MD
        assert config.geometry.norm == "l1"
        assert config.grid_size == 2
        assert config.output is None

    def test_grid_expansion_order(self, experiment_payload: dict[str, Any]) -> None:
        """Test that runs expand in (n, d, ε, seed) order."""
        experiment_payload["n_values"] = [32, 64]
        experiment_payload["budget"]["epsilons"] = [0.5, 1.0]
        config = ExperimentConfig.model_validate(experiment_payload)

        runs = list(config.runs(population_samples=100))

        assert len(runs) == config.grid_size == 8
        assert [(r.n, r.epsilon, r.seed) for r in runs[:3]] == [(32, 0.5, 0), (32, 0.5, 1), (32, 1.0, 0)]
        assert all(r.population_samples == 500 for r in runs)

    def test_population_samples_fall_back_to_settings(
        self, experiment_payload: dict[str, Any]
    ) -> None:
        """Test that the caller's default applies when the config has none."""
        del experiment_payload["population_samples"]
        config = ExperimentConfig.model_validate(experiment_payload)

        assert next(config.runs(population_samples=123)).population_samples == 123

    def test_run_constants_are_frozen_into_specs(self, experiment_payload: dict[str, Any]) -> None:
        """Test that noise and baseline constants travel with each run."""
        config = ExperimentConfig.model_validate(experiment_payload)

        default = next(config.runs(10))
        custom = next(
            config.runs(10, sigma_constant=2.5, baseline_max_iterations=7, baseline_tolerance=1e-3)
        )

        assert (default.sigma_constant, default.baseline_max_iterations) == (100.0, 20_000)
        assert (custom.sigma_constant, custom.baseline_max_iterations) == (2.5, 7)
        assert custom.baseline_tolerance == 1e-3

    def test_run_id(self, experiment_payload: dict[str, Any]) -> None:
        """Test the grid point identifier."""
        run = next(ExperimentConfig.model_validate(experiment_payload).runs(10))

        assert run.run_id == "noisy-md:n=64:d=4:eps=1:seed=0"
        assert run.budget_status == BudgetStatus.ENFORCED

    @pytest.mark.parametrize(
        ("path", "value"),
        [
            (("schema_version",), 2),
            (("algorithm",), "sgd"),
            (("budget", "epsilons"), [1.0, -1.0]),
            (("budget", "delta"), 0.0),
            (("n_values",), []),
            (("d_values",), [0]),
            (("seeds",), [-1]),
            (("instance", "family"), "logistic"),
        ],
    )
    def test_invalid_fields(
        self, experiment_payload: dict[str, Any], path: tuple[str, ...], value: Any
    ) -> None:
        """Test that malformed fields fail validation."""
        target = experiment_payload
        for key in path[:-1]:
            target = target[key]
        target[path[-1]] = value

        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(experiment_payload)

    def test_unknown_keys_are_rejected(self, experiment_payload: dict[str, Any]) -> None:
        """Test extra="forbid"."""
        experiment_payload["learning_rate"] = 0.1

        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(experiment_payload)

    def test_sc_wrapper_needs_inner(self, experiment_payload: dict[str, Any]) -> None:
        """Test that the reduction names its inner algorithm."""
        experiment_payload["algorithm"] = "sc-wrapper"

        with pytest.raises(ValidationError, match="options.inner"):
            ExperimentConfig.model_validate(experiment_payload)

    def test_tree_fw_needs_l1_and_smooth_loss(self, experiment_payload: dict[str, Any]) -> None:
        """Test the tree Frank-Wolfe cross-field rules."""
        experiment_payload["algorithm"] = "tree-fw"
        experiment_payload["geometry"] = {"norm": "lp", "p": 1.5}
        with pytest.raises(ValidationError, match="l1 ball"):
            ExperimentConfig.model_validate(experiment_payload)

        experiment_payload["geometry"] = {"norm": "l1"}
        experiment_payload["instance"] = {"family": "sign"}
        with pytest.raises(ValidationError, match="smooth"):
            ExperimentConfig.model_validate(experiment_payload)

    def test_lp_geometry_needs_exponent(self) -> None:
        """Test that norm "lp" requires p."""
        with pytest.raises(ValidationError, match="geometry.p"):
            GeometrySpec(norm="lp")


@pytest.mark.unit
class TestResultRecord:
    """Test suite for ResultRecord."""

    @pytest.fixture
    def record_fields(self) -> dict[str, Any]:
        """Fixture providing the fields of a successful record."""
        return {
            "run_id": "noisy-md:n=64:d=4:eps=1:seed=0",
            "algorithm": "noisy-md",
            "n": 64,
            "d": 4,
            "epsilon": 1.0,
            "delta": 1e-6,
            "seed": 0,
            "success": True,
            "excess_empirical": 0.1,
            "grad_count": 400,
            "wall_ms": 3.5,
        }

    def test_successful_record(self, record_fields: dict[str, Any]) -> None:
        """Test creating a successful record."""
        record = ResultRecord(**record_fields)

        assert record.budget_status == "enforced"
        assert record.error_type is None

    def test_success_needs_metrics(self, record_fields: dict[str, Any]) -> None:
        """Test that a successful record carries grad_count."""
        record_fields["grad_count"] = None

        with pytest.raises(ValidationError, match="grad_count"):
            ResultRecord(**record_fields)

    def test_failure_needs_message(self, record_fields: dict[str, Any]) -> None:
        """Test that a failed record carries an error annotation."""
        record_fields.update(success=False, excess_empirical=None, grad_count=None)

        with pytest.raises(ValidationError, match="error_message"):
            ResultRecord(**record_fields)

    def test_grad_count_positive(self, record_fields: dict[str, Any]) -> None:
        """Test that zero gradients are rejected."""
        record_fields["grad_count"] = 0

        with pytest.raises(ValidationError):
            ResultRecord(**record_fields)


@pytest.mark.unit
class TestRateTable:
    """Test suite for RateTable."""

    def test_slope_gap(self) -> None:
        """Test fitted minus theory slope."""
        rows = [RateRow(axis_value=10, median_excess=1.0, runs=1)] * 2
        table = RateTable(group_by="n", rows=rows, fitted_slope=-0.4, intercept=0.0, theory_slope=-0.5)

        assert table.slope_gap == pytest.approx(0.1)

    def test_needs_two_rows(self) -> None:
        """Test that a single point has no slope."""
        with pytest.raises(ValidationError):
            RateTable(
                group_by="n",
                rows=[RateRow(axis_value=10, median_excess=1.0, runs=1)],
                fitted_slope=0.0,
                intercept=0.0,
            )
