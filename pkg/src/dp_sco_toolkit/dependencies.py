"""Shared dependency factory for the benchmark CLI.

Services are created once per process and reused by every subcommand.
"""

import logging

from dp_sco_toolkit.observability import configure_logging, setup_observability
from dp_sco_toolkit.services.baseline_service import BaselineSolver
from dp_sco_toolkit.services.benchmark_service import BenchmarkService
from dp_sco_toolkit.services.verification_service import VerificationService
from dp_sco_toolkit.settings import ToolkitSettings, get_settings

logger = logging.getLogger(__name__)

# Module-level caches
_baseline_solver: BaselineSolver | None = None
_benchmark_service: BenchmarkService | None = None
_verification_service: VerificationService | None = None


def get_baseline_solver() -> BaselineSolver:
    """Create or retrieve the cached baseline solver."""
    global _baseline_solver

    if _baseline_solver is not None:
        return _baseline_solver

    _baseline_solver = BaselineSolver.from_settings(get_settings())
    return _baseline_solver


def get_benchmark_service() -> BenchmarkService:
    """Create or retrieve the cached benchmark service.

    Returns:
        BenchmarkService wired to the settings and baseline solver
    """
    global _benchmark_service

    if _benchmark_service is not None:
        return _benchmark_service

    _benchmark_service = BenchmarkService(settings=get_settings(), baseline=get_baseline_solver())
    logger.info("Benchmark service initialized")
    return _benchmark_service


def get_verification_service() -> VerificationService:
    """Create or retrieve the cached verification service."""
    global _verification_service

    if _verification_service is not None:
        return _verification_service

    _verification_service = VerificationService()
    return _verification_service


def reset_dependencies() -> None:
    """Drop every cached instance (tests change settings between cases)."""
    global _baseline_solver, _benchmark_service, _verification_service
    _baseline_solver = None
    _benchmark_service = None
    _verification_service = None
    get_settings.cache_clear()


def initialize_environment(settings: ToolkitSettings | None = None) -> None:
    """Configure logging and observability.

    Should be called once at process start.
    """
    settings = settings or get_settings()
    configure_logging(settings.log_level)
    setup_observability()
    logger.info("Environment initialized", extra={"environment": settings.environment})
