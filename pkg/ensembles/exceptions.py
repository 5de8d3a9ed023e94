"""
Exceptions shared by every QND metrology module.

Management commands map these onto process exit codes; the REST views map
them onto 400 responses.
"""


class QNDError(Exception):
    """Base class for toolkit errors."""


class ParameterError(QNDError, ValueError):
    """An input lies outside the domain of the operation."""


class DivergenceError(QNDError, ArithmeticError):
    """The requested quantity diverges (for example xi = 0 in a phase error)."""


class NumericError(QNDError, ArithmeticError):
    """An iterative computation failed to converge."""

    def __init__(self, message, best_x=None, best_value=None):
        super().__init__(message)
        self.best_x = best_x
        self.best_value = best_value


class CapacityError(QNDError, MemoryError):
    """A simulated object would exceed the configured size cap."""

    def __init__(self, message, dimension=None, required=None, cap=None):
        super().__init__(message)
        self.dimension = dimension
        self.required = required
        self.cap = cap


class DegenerateProtocolError(QNDError):
    """The protocol's signal has no slope or its observable is undefined."""


class DescriptorError(QNDError, LookupError):
    """An observable or quantity descriptor references something absent."""


class MeanSpinDegenerateError(QNDError, ArithmeticError):
    """The mean collective spin vanishes, so the Wineland parameter diverges."""
