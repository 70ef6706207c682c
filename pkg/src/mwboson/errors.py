"""Exception hierarchy shared by all modules."""


class MwbosonError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(MwbosonError, ValueError):
    """Input rejected: wrong shape, not unitary, outside a declared range."""


class OutOfBandError(ValidationError):
    """A requested flux or frequency is outside what the hardware model can reach."""


class ResourceCapError(MwbosonError):
    """Instance too large for desk-scale enumeration."""


class InvariantViolation(MwbosonError):
    """An internal physics or numerics check failed."""


class ConvergenceError(InvariantViolation):
    """Time-stepping did not reach the requested tolerance."""
