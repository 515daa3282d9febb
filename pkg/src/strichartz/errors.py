"""Exception types raised by the numerical routines."""


class StrichartzError(Exception):
    """Base class for all package errors."""


class BoundaryMassError(StrichartzError):
    """Too much of the integrand sits on the outer layer of the grid."""


class AliasError(StrichartzError):
    """Frequency content reaches the outer band of the dual grid."""


class ZeroModeError(StrichartzError):
    """The zero-frequency cell dominates a negative-order Sobolev weight."""


class UnsupportedCase(StrichartzError):
    pass


class BranchError(StrichartzError):
    """A complex square root or logarithm was asked to cross its cut."""


class DomainError(StrichartzError):
    pass


class RegionError(StrichartzError):
    """Frequency point outside (or on the edge of) the support region."""


class ConvergenceError(StrichartzError):
    pass


class ConstraintViolation(StrichartzError):
    """Coefficients leave the admissible cone |Re b| < -Re A."""


class DegenerateError(StrichartzError):
    pass


class InvalidRectangle(StrichartzError):
    pass


class VanishingSampleError(StrichartzError):
    pass


class StagnationError(StrichartzError):
    """Line search failed too many times in a row."""
