"""Exception types raised by the sketch, estimators and file loaders."""


class AceError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(AceError, ValueError):
    """An argument broke a documented precondition (bad shape, bad range)."""


class DomainError(AceError, ValueError):
    """Input is outside the domain where the quantity is defined, e.g. a zero vector."""


class InconsistentDeleteError(AceError):
    """A delete would drive a counter below zero."""


class UnsupportedOperationError(AceError):
    """The operation is not available for this sketch configuration."""


class DataError(AceError):
    """A dataset or sketch file could not be parsed."""
