"""Exception types raised by the toolkit.

Library functions raise these for invalid inputs and violated preconditions.
The benchmark service catches them per grid point and records them as failed
runs instead of propagating.
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class DomainError(ToolkitError, ValueError):
    """Mathematically invalid input (p <= 1, non-finite vectors, empty data)."""


class PreconditionError(ToolkitError, ValueError):
    """An algorithm precondition does not hold (e.g. infeasible start)."""


class ParameterizationError(ToolkitError, ValueError):
    """A schedule or noise-calibration precondition is violated.

    The message names the violated inequality.
    """


class FallbackRequired(ParameterizationError):
    """Smoothness is below the tree regime; use T = 1 and b = ⌊2n/3⌋ instead."""


class SampleExhaustionError(ToolkitError, RuntimeError):
    """The sampling plan needs more fresh samples than the dataset holds."""


class SolverError(ToolkitError, RuntimeError):
    """An inner numerical solver failed to converge.

    Attributes:
        residual: Constraint or stationarity residual at the last iterate
    """

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class ConfigError(ToolkitError, ValueError):
    """An experiment config or result file cannot be read or validated.

    The message names the file and the offending line or field path.
    """
