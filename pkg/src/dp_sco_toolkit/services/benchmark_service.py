"""Benchmark service: runs every grid point of an experiment and records results."""

import logging
import time
from collections.abc import Callable
from concurrent.futures import Future, ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass
from functools import partial

from dp_sco_toolkit.adapters.registry import create_adapter
from dp_sco_toolkit.errors import ToolkitError
from dp_sco_toolkit.losses import empirical_loss, population_excess_estimate
from dp_sco_toolkit.models.experiment_models import ExperimentConfig, ResultRecord, RunSpec
from dp_sco_toolkit.observability import traced
from dp_sco_toolkit.observability.metrics import record_run_failure, record_run_success
from dp_sco_toolkit.repositories.result_repository import ResultRepository
from dp_sco_toolkit.services.baseline_service import BaselineSolver
from dp_sco_toolkit.services.problem_service import build_problem
from dp_sco_toolkit.settings import ToolkitSettings

logger = logging.getLogger(__name__)


@dataclass
class RunOutcome:
    """Result of one grid point.

    Attributes:
        success: Whether the run completed and its record was written
        run_id: Grid point identifier
        record: The record (failed runs carry the error annotation)
        written: Whether the record reached the result file
        error_message: Error message if the run failed, None otherwise
    """

    success: bool
    run_id: str
    record: ResultRecord
    written: bool = False
    error_message: str | None = None


def failed_record(spec: RunSpec, error: Exception, wall_ms: float = 0.0) -> ResultRecord:
    """Record of a run that raised ``error``."""
    return ResultRecord(
        run_id=spec.run_id,
        algorithm=spec.algorithm.value,
        n=spec.n,
        d=spec.d,
        epsilon=spec.epsilon,
        delta=spec.delta,
        seed=spec.seed,
        success=False,
        wall_ms=wall_ms,
        param_dump={"spec": spec.model_dump(mode="json")},
        non_private=spec.non_private,
        budget_status=spec.budget_status,
        error_type=type(error).__name__,
        error_message=str(error) or type(error).__name__,
    )


@traced("benchmark_run")
def execute_run(spec: RunSpec) -> ResultRecord:
    """Run one grid point and measure it.

    The empirical minimum comes from a BaselineSolver built from the RunSpec's
    own iteration cap and tolerance.

    Toolkit errors (infeasible schedules, violated preconditions) become a
    failed record. Other exceptions propagate to the caller.
    """
    start = time.perf_counter()
    algorithm = spec.algorithm.value
    try:
        problem = build_problem(spec)
        adapter = create_adapter(spec.algorithm, spec.options.inner)
        run = adapter.run(problem)
        certificate = BaselineSolver.from_spec(spec).solve(problem)
        value = empirical_loss(problem.loss, run.x, problem.dataset)
        population = population_excess_estimate(
            problem.loss,
            run.x,
            problem.population_reference,
            problem.distribution,
            spec.population_samples,
            problem.population_seed,
        )
    except ToolkitError as e:
        logger.error(f"Run {spec.run_id} failed: {e}")  # pragma: no cover
        record_run_failure(algorithm, type(e).__name__)
        return failed_record(spec, e, (time.perf_counter() - start) * 1000.0)

    wall_ms = (time.perf_counter() - start) * 1000.0
    record_run_success(algorithm, wall_ms / 1000.0)
    logger.info(
        "Run finished",
        extra={"run_id": spec.run_id, "grad_count": run.grad_count, "wall_ms": wall_ms},
    )
    return ResultRecord(
        run_id=spec.run_id,
        algorithm=algorithm,
        n=spec.n,
        d=spec.d,
        p=run.p,
        epsilon=spec.epsilon,
        delta=spec.delta,
        seed=spec.seed,
        success=True,
        excess_empirical=max(0.0, value - certificate.value),
        excess_population_est=population.mean,
        population_stderr=population.stderr,
        grad_count=run.grad_count,
        wall_ms=wall_ms,
        param_dump={
            "spec": spec.model_dump(mode="json"),
            "schedule": run.params,
            "baseline": asdict(certificate),
            "report": run.report,
        },
        non_private=spec.non_private,
        budget_status=spec.budget_status,
    )


class BenchmarkService:
    """Runs experiments in a worker pool and writes records through one writer.

    Each grid point owns its random streams (derived from its seed), so the
    pool size never changes the numbers, only the record order.
    """

    def __init__(self, settings: ToolkitSettings, baseline: BaselineSolver | None = None) -> None:
        """Initialize the BenchmarkService.

        Args:
            settings: Toolkit settings (population samples, baseline solver)
            baseline: Baseline settings stamped onto every run (from settings by default)
        """
        self.settings = settings
        self.baseline = baseline or BaselineSolver.from_settings(settings)

    def run_experiment(
        self, config: ExperimentConfig, repository: ResultRepository, jobs: int = 1
    ) -> list[RunOutcome]:
        """Execute every (grid point × seed) of ``config``.

        Args:
            config: Validated experiment config
            repository: Writer for the result file
            jobs: Worker processes (1 runs inline)

        Returns:
            One RunOutcome per grid point, in completion order
        """
        specs = list(
            config.runs(
                self.settings.population_samples,
                sigma_constant=self.settings.sigma_constant,
                baseline_max_iterations=self.baseline.max_iterations,
                baseline_tolerance=self.baseline.tolerance,
            )
        )
        logger.info(
            "Experiment starting",
            extra={"algorithm": config.algorithm.value, "runs": len(specs), "jobs": jobs},
        )
        if config.non_private:
            logger.warning("Experiment runs in non-private mode; budgets are nominal")

        outcomes = []
        if jobs <= 1:
            for spec in specs:
                outcomes.append(self._collect(spec, repository, partial(execute_run, spec)))
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures: dict[Future[ResultRecord], RunSpec] = {
                    pool.submit(execute_run, spec): spec for spec in specs
                }
                for future in as_completed(futures):
                    outcomes.append(self._collect(futures[future], repository, future.result))

        failures = sum(1 for outcome in outcomes if not outcome.success)
        logger.info("Experiment finished", extra={"runs": len(outcomes), "failures": failures})
        return outcomes

    def _collect(
        self,
        spec: RunSpec,
        repository: ResultRepository,
        result: Callable[[], ResultRecord],
    ) -> RunOutcome:
        try:
            record = result()
        except Exception as e:
            logger.error(f"Run {spec.run_id} crashed: {e}")  # pragma: no cover
            record_run_failure(spec.algorithm.value, type(e).__name__)
            record = failed_record(spec, e)
        written = repository.append(record)
        return RunOutcome(
            success=record.success and written,
            run_id=record.run_id,
            record=record,
            written=written,
            error_message=record.error_message,
        )

    def reproduce(self, record: ResultRecord) -> ResultRecord:
        """Re-execute a record from its param dump.

        Seed, noise constant and baseline settings all come from the record,
        never from the current environment.
        """
        return execute_run(record.spec())
