"""Exception and warning types raised by the library."""


class EllipticFaceError(Exception):
    """Base class for all library errors."""


class PoleError(EllipticFaceError, ZeroDivisionError):
    """A theta value in a denominator vanished (non-generic parameters)."""


class AdmissibilityError(EllipticFaceError, ValueError):
    """Two weights are not joined by an allowed step."""


class UnlistedPatternError(EllipticFaceError, KeyError):
    """No closed-form expression is available for this fused pattern."""


class ProjectionError(EllipticFaceError, ArithmeticError):
    """A vector failed to lie in the expected fused subspace."""


class ConvergenceError(EllipticFaceError, ArithmeticError):
    """A truncated lattice sum did not stabilise."""


class ConfigError(EllipticFaceError, ValueError):
    """Invalid configuration field."""


class BranchWarning(UserWarning):
    """A square-root argument crossed the principal branch cut."""
