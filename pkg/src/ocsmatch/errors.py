class DomainError(ValueError):
    """A parameter lies outside the domain an operation is defined on."""


class SizeError(ValueError):
    """An exact oracle was asked to enumerate an input that is too large."""
