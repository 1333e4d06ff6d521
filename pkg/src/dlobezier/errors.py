"""Exception and warning types raised across the package."""


class DLOBezierError(Exception):
    """Base class for every error raised by this package."""


class DomainError(DLOBezierError, ValueError):
    """A scalar argument lies outside its admissible interval."""


class UnsupportedOrderError(DLOBezierError, ValueError):
    """Requested polynomial order exceeds the supported cap."""


class InsufficientDataError(DLOBezierError, ValueError):
    """Too few points (or pixels) for the requested operation."""


class DimensionError(DLOBezierError, ValueError):
    """Array lengths that must agree do not."""


class DegenerateCenterlineError(DLOBezierError, ValueError):
    """All centerline points coincide, so no arc length exists."""


class SingularSystemError(DLOBezierError, ArithmeticError):
    """The least-squares system is rank deficient."""


class NoObjectError(DLOBezierError):
    """The foreground mask is empty."""


class ConfigError(DLOBezierError, ValueError):
    """Invalid experiment or generator configuration."""


class IllConditionedWarning(UserWarning):
    """The normal matrix is close to singular; the solution may be inaccurate."""
