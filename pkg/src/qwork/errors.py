"""Exception types raised across the package.

All of them derive from ``QworkError`` (itself a ``ValueError``), so callers
can catch either the specific failure or the whole family.
"""


class QworkError(ValueError):
    pass


class NotHermitian(QworkError):
    pass


class NotUnitary(QworkError):
    pass


class NotDensityMatrix(QworkError):
    pass


class DimensionMismatch(QworkError):
    pass


class InvalidDimension(QworkError):
    pass


class TailTooHeavy(QworkError):
    """Truncating the thermal tail would need more levels than the cap allows."""


class PoleHit(QworkError):
    """Hypergeometric parameter ``a`` is a non-positive integer."""


class NoConvergence(QworkError):
    pass


class OnPeak(QworkError):
    """Work value sits on a delta peak of the quench distribution."""


class QuadratureFailure(QworkError):
    pass


class DiagonalityViolation(QworkError):
    """Initial system state is not diagonal in the initial energy basis."""
