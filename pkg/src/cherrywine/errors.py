"""Exception types shared across the package.

The CLI maps these onto exit codes: precondition/usage failures exit with 2,
data or model integrity problems with 3, numerical failures with 4.
"""


class CherryWineError(Exception):
    """Base class for all package errors."""


class PreconditionError(CherryWineError):
    """An operation was called outside its contract (usage error)."""


class DataError(CherryWineError):
    """Input data violates an invariant (parse failure, non-finite values, ...)."""


class ModelError(CherryWineError):
    """A persisted model file is malformed or fails validation."""


class NumericalError(CherryWineError):
    """A numerical computation produced an inconsistent or undefined result."""
