"""Exception hierarchy shared by all stochgate modules."""


class StochGateError(Exception):
    """Base class for errors raised by stochgate."""


class ValidationError(StochGateError, ValueError):
    """Malformed input: wrong shape, non-unitary matrix, bad index."""


class CapacityError(StochGateError, ValueError):
    """Requested register size exceeds what the dense simulator supports."""


class DomainError(StochGateError, ValueError):
    """Parameters outside the domain where a formula is defined."""


class PreconditionError(StochGateError, ValueError):
    """A documented precondition on the arguments does not hold."""


class ConsistencyError(StochGateError, RuntimeError):
    """Internal numerical inconsistency, e.g. sampling a zero-weight branch."""
