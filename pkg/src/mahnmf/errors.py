"""Exception types raised across the package."""


class FactorizationError(Exception):
    """Base class for all package errors."""


class DimensionError(FactorizationError, ValueError):
    """Operand shapes do not compose."""


class DomainError(FactorizationError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateBasisError(FactorizationError, ValueError):
    """A basis column has zero norm, so its dual variable is undefined."""


class DegenerateBasisWarning(RuntimeWarning):
    pass


class NumericalFailure(FactorizationError, ArithmeticError):
    """Non-finite values appeared during an iterative solve."""

    def __init__(self, message, iteration=None, trace=None):
        super().__init__(message)
        self.iteration = iteration
        self.trace = trace


class ConfigError(FactorizationError, ValueError):
    """Invalid or unsupported run configuration."""
