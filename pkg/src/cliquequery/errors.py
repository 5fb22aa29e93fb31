"""Shared exception types."""


class DomainError(ValueError):
    """Argument outside an operation's declared domain."""


class PreconditionError(ValueError):
    """Structured input violates a documented precondition."""
