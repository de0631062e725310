"""Exception hierarchy shared by the library and the CLI.

Every class carries the process exit code the CLI uses when the error
escapes a command: 2 for physics/geometry failures, 3 for numerical
failures, 4 for scans where most points failed.
"""

from typing import Optional


class SpdcError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(SpdcError, ValueError):
    """Invalid or missing configuration value."""

    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


# ---- Physics / geometry (exit 2) ----

class PhysicsError(SpdcError, ValueError):
    exit_code = 2


class DomainError(PhysicsError):
    """Frequency outside the band covered by the dispersion model."""


class EvanescentWaveError(PhysicsError):
    """Transverse wave vector too large for a propagating wave."""


class GeometryError(PhysicsError):
    """No forward-propagating solution, or a formula used outside its geometry."""


class NoPhaseMatchingError(PhysicsError):
    """Phase matching (or decorrelation) cannot be achieved for this setup."""


# ---- Numerics (exit 3) ----

class NumericError(SpdcError, ArithmeticError):
    exit_code = 3


class AccuracyError(NumericError):
    """A quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, value: complex = float("nan"),
                 estimate: float = float("inf")):
        self.value = value
        self.estimate = estimate
        super().__init__(f"{message} (best value {value}, error estimate {estimate:.3e})")


class SingularMatrixError(NumericError):
    """Matrix singular to working precision."""

    def __init__(self, message: str, condition: float = float("inf")):
        self.condition = condition
        super().__init__(f"{message} (condition number {condition:.3e})")


class WindowError(NumericError):
    """Spectral window too small: the amplitude has not decayed at the grid edge."""


class ValidityError(NumericError):
    """Closed-form approximation used outside its regime of validity."""


class DegenerateInputError(NumericError):
    """Input carries no information (e.g. an all-zero amplitude grid)."""


class ShapeError(NumericError, ValueError):
    """Two grids or arrays that must share axes do not."""


# ---- Scans (exit 4) ----

class ScanFailedError(SpdcError):
    exit_code = 4

    def __init__(self, failed: int, total: int):
        self.failed = failed
        self.total = total
        super().__init__(f"{failed} of {total} scan points failed")
