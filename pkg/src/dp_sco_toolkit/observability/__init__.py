"""Logging, tracing and metrics utilities."""

from dp_sco_toolkit.observability.config import configure_logging, setup_observability
from dp_sco_toolkit.observability.decorators import traced

__all__ = ["setup_observability", "configure_logging", "traced"]
