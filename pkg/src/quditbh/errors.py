"""Exception types shared across the package."""


class QbhError(Exception):
    """Base class for all package errors."""


class ShapeError(QbhError):
    """Operands have incompatible or non-conforming shapes."""


class CapacityError(QbhError):
    """Requested object exceeds a configured size cap."""


class InputError(QbhError):
    """A value is outside the documented domain of an operation."""


class LabelError(InputError):
    """A basis label index is out of range."""


class ContractError(QbhError):
    """An input violates a structural precondition (e.g. not Hermitian)."""


class PreconditionError(ContractError):
    """A documented operation precondition does not hold."""
