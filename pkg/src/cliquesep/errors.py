"""Exception types shared across the package."""


class DomainError(ValueError):
    """Invalid argument values: bad vertices, malformed files, bad parameters."""


class PreconditionError(DomainError):
    """A structural precondition was violated (e.g. a non-decomposable input)."""


class CapacityError(DomainError):
    """Requested size exceeds the configured enumeration limit."""


class EmptySupportError(DomainError):
    """A law assigns zero probability to every decomposable graph."""
