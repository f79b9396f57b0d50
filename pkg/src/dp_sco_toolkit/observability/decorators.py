"""OpenTelemetry tracing decorators."""

import functools
from collections.abc import Callable
from typing import Any, TypeVar

from opentelemetry import trace
from opentelemetry.trace import Span, Status, StatusCode

from dp_sco_toolkit.errors import SolverError, ToolkitError

F = TypeVar("F", bound=Callable[..., Any])

TRACER_NAME = "dp-sco"


def _record_failure(span: Span, error: Exception) -> None:
    span.set_attribute("success", False)
    span.set_attribute("error.type", type(error).__name__)
    span.set_attribute("error.message", str(error))
    # toolkit errors are input or schedule problems, anything else is a defect
    span.set_attribute("error.toolkit", isinstance(error, ToolkitError))
    if isinstance(error, SolverError):
        span.set_attribute("solver.residual", error.residual)
    span.record_exception(error)
    span.set_status(Status(StatusCode.ERROR, type(error).__name__))


def traced(span_name: str | None = None) -> Callable[[F], F]:
    """Wrap an algorithm or run entry point in a span.

    The span records success, and on failure the exception class, message,
    whether it is a toolkit error, and the solver residual when one exists.
    The exception is re-raised unchanged.

    Example:
        @traced("noisy_md")
        def noisy_md(dataset, config, x0=None):
            ...
    """

    def decorator(func: F) -> F:
        name = span_name or func.__name__
        tracer = trace.get_tracer(TRACER_NAME)

        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            with tracer.start_as_current_span(name, record_exception=False) as span:
                span.set_attribute("code.function", func.__qualname__)
                try:
                    result = func(*args, **kwargs)
                except Exception as e:
                    _record_failure(span, e)
                    raise
                span.set_attribute("success", True)
                return result

        return wrapper  # type: ignore

    return decorator
