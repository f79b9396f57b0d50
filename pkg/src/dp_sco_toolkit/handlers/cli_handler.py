"""Command-line handler for the ``dp-sco-bench`` benchmark runner.

Subcommands:
    run          Execute every grid point of an experiment config
    rate-table   Fit log-log slopes over a result file
    verify       Run the fast invariant suites

Exit codes: 0 success, 1 failed runs or checks, 2 unreadable or invalid input
(no result file is written in that case).
"""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import get_args

from pydantic import ValidationError

from dp_sco_toolkit.dependencies import (
    get_benchmark_service,
    get_verification_service,
    initialize_environment,
)
from dp_sco_toolkit.errors import ConfigError, DomainError, ParameterizationError
from dp_sco_toolkit.models.experiment_models import ExperimentConfig
from dp_sco_toolkit.models.rate_models import THEORY_SLOPES, RateAxis, RateMetric
from dp_sco_toolkit.observability import traced
from dp_sco_toolkit.repositories.result_repository import ResultRepository, load_records
from dp_sco_toolkit.services.benchmark_service import BenchmarkService
from dp_sco_toolkit.services.rate_table_service import (
    compare_to_theory,
    rate_table,
    write_rate_table,
)
from dp_sco_toolkit.services.verification_service import VerificationService
from dp_sco_toolkit.settings import ToolkitSettings, get_settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_CONFIG_ERROR = 2


def load_config(path: Path) -> ExperimentConfig:
    """Read and validate an experiment config.

    Raises:
        ConfigError: With the line of a JSON syntax error or the field path of
            a validation error
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from e
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in error['loc']) or '<root>'}: {error['msg']}"
            for error in e.errors()
        )
        raise ConfigError(f"{path}: invalid config: {problems}") from e


def theory_argument(value: str) -> str | float:
    """A named theory rate or a numeric slope."""
    try:
        return float(value)
    except ValueError:
        if value not in THEORY_SLOPES:
            raise argparse.ArgumentTypeError(
                f"expected a number or one of {', '.join(sorted(THEORY_SLOPES))}"
            ) from None
        return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dp-sco-bench", description="Benchmark private stochastic convex optimizers."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="execute an experiment config")
    run.add_argument("--config", type=Path, required=True, help="experiment config (JSON)")
    run.add_argument("--out", type=Path, help="result file (NDJSON)")
    run.add_argument("--jobs", type=int, default=None, help="worker processes")
    run.add_argument("--non-private", action="store_true", help="disable all noise")

    table = commands.add_parser("rate-table", help="fit rates over a result file")
    table.add_argument("--results", type=Path, required=True, help="result file (NDJSON)")
    table.add_argument("--group-by", choices=get_args(RateAxis), required=True)
    table.add_argument("--theory", type=theory_argument, default=None)
    table.add_argument("--metric", choices=get_args(RateMetric), default="excess_empirical")
    table.add_argument("--out", type=Path, help="rate table file (JSON)")
    table.add_argument(
        "--tolerance", type=float, default=None, help="fail if |fitted - theory slope| exceeds this"
    )

    verify = commands.add_parser("verify", help="run the invariant suites")
    verify.add_argument("--check", action="append", dest="checks", help="run only this check")
    verify.add_argument("--seed", type=int, default=0, help="base seed of the check instances")
    return parser


class BenchCliHandler:
    """Dispatches parsed command lines to the benchmark services."""

    def __init__(
        self,
        settings: ToolkitSettings,
        benchmark_service: BenchmarkService,
        verification_service: VerificationService | None = None,
    ) -> None:
        """Initialize the handler.

        Args:
            settings: Toolkit settings (default output directory and worker count)
            benchmark_service: Service executing experiment grids
            verification_service: Service running the invariant checks
        """
        self.settings = settings
        self.benchmark_service = benchmark_service
        self.verification_service = verification_service or VerificationService()

    def handle(self, args: argparse.Namespace) -> int:
        try:
            if args.command == "run":
                return self.handle_run(args)
            if args.command == "rate-table":
                return self.handle_rate_table(args)
            return self.handle_verify(args)
        except ConfigError as e:
            logger.error(f"Input error: {e}")  # pragma: no cover
            print(f"error: {e}", file=sys.stderr)
            return EXIT_CONFIG_ERROR

    def output_path(self, config: ExperimentConfig, out: Path | None) -> Path:
        """--out, then the config's output, then <output_dir>/<algorithm>.ndjson."""
        if out is not None:
            return out
        if config.output is not None:
            return config.output
        return self.settings.output_dir / f"{config.algorithm.value}.ndjson"

    @traced("cli_run")
    def handle_run(self, args: argparse.Namespace) -> int:
        config = load_config(args.config)
        if args.non_private:
            config = config.model_copy(update={"non_private": True})
        jobs = args.jobs or self.settings.jobs
        if jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {jobs}")
        path = self.output_path(config, args.out)
        repository = ResultRepository(path, csv_mirror=config.csv_mirror)

        outcomes = self.benchmark_service.run_experiment(config, repository, jobs=jobs)
        failures = [outcome for outcome in outcomes if not outcome.success]
        for failure in failures:
            print(f"FAILED {failure.run_id}: {failure.error_message}", file=sys.stderr)
        print(f"wrote {repository.records_written} records to {path} ({len(failures)} failed)")
        return EXIT_FAILURES if failures else EXIT_OK

    def handle_rate_table(self, args: argparse.Namespace) -> int:
        try:
            records = load_records(args.results)
        except OSError as e:
            raise ConfigError(f"{args.results}: cannot read results: {e}") from e
        except DomainError as e:
            raise ConfigError(str(e)) from e
        try:
            table = rate_table(records, args.group_by, args.theory, args.metric)
        except (ParameterizationError, DomainError) as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_FAILURES

        print(f"{args.group_by:>12} {'median':>14} {'runs':>6}")
        for row in table.rows:
            print(f"{row.axis_value:>12.6g} {row.median_excess:>14.6e} {row.runs:>6}")
        theory = "" if table.theory_slope is None else f" (theory {table.theory_slope:+.4f})"
        print(f"fitted slope {table.fitted_slope:+.4f}{theory}")
        if args.out is not None and not write_rate_table(table, args.out):
            return EXIT_FAILURES
        if args.tolerance is not None:
            if table.theory_slope is None:
                raise ConfigError("--tolerance needs --theory")
            if args.tolerance < 0:
                raise ConfigError(f"--tolerance must be >= 0, got {args.tolerance}")
            if not compare_to_theory(table, args.tolerance):
                print(f"slope outside tolerance {args.tolerance}", file=sys.stderr)
                return EXIT_FAILURES
        return EXIT_OK

    def handle_verify(self, args: argparse.Namespace) -> int:
        service = self.verification_service
        if args.seed != service.seed:
            service = VerificationService(seed=args.seed)
        unknown = sorted(set(args.checks or []) - set(service.checks))
        if unknown:
            raise ConfigError(f"unknown checks: {', '.join(unknown)}")
        results = service.run_all(args.checks)
        for result in results:
            print(result.line())
        return EXIT_OK if all(result.passed for result in results) else EXIT_FAILURES


def main(argv: Sequence[str] | None = None) -> int:
    """Console entry point."""
    args = build_parser().parse_args(argv)
    initialize_environment()
    handler = BenchCliHandler(
        settings=get_settings(),
        benchmark_service=get_benchmark_service(),
        verification_service=get_verification_service(),
    )
    return handler.handle(args)
