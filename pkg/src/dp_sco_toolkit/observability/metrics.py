"""Custom metrics for optimization runs."""

from opentelemetry import metrics

meter = metrics.get_meter("dp-sco")

gradient_counter = meter.create_counter(
    name="gradient_evaluations_total",
    description="Total per-sample gradient evaluations by algorithm",
    unit="1",
)

noise_draw_counter = meter.create_counter(
    name="noise_draws_total",
    description="Total noise vectors or scalars drawn by mechanism",
    unit="1",
)

run_success_counter = meter.create_counter(
    name="benchmark_runs_total",
    description="Total number of completed benchmark runs by algorithm",
    unit="1",
)

run_failure_counter = meter.create_counter(
    name="benchmark_run_failures_total",
    description="Total number of failed benchmark runs by algorithm",
    unit="1",
)

run_duration_histogram = meter.create_histogram(
    name="benchmark_run_duration_seconds",
    description="Wall time of single benchmark runs by algorithm",
    unit="s",
)


def record_gradients(algorithm: str, count: int) -> None:
    """Record per-sample gradient evaluations.

    Args:
        algorithm: Algorithm that evaluated the gradients
        count: Number of per-sample gradients evaluated
    """
    gradient_counter.add(count, {"algorithm": algorithm})


def record_noise_draws(mechanism: str, count: int) -> None:
    """Record noise draws.

    Args:
        mechanism: Noise mechanism ("gaussian" or "laplace")
        count: Number of draws
    """
    noise_draw_counter.add(count, {"mechanism": mechanism})


def record_run_success(algorithm: str, duration_seconds: float) -> None:
    """Record a completed benchmark run.

    Args:
        algorithm: Algorithm name
        duration_seconds: Wall time of the run
    """
    run_success_counter.add(1, {"algorithm": algorithm})
    run_duration_histogram.record(duration_seconds, {"algorithm": algorithm})


def record_run_failure(algorithm: str, error_type: str) -> None:
    """Record a failed benchmark run.

    Args:
        algorithm: Algorithm name
        error_type: Exception class name of the failure
    """
    run_failure_counter.add(1, {"algorithm": algorithm, "error_type": error_type})
