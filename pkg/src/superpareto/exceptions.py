"""Exception and warning classes raised across the package."""


class SuperParetoError(Exception):
    """Base class for all package errors."""


class DomainError(SuperParetoError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class InsufficientDataError(SuperParetoError, ValueError):
    """Too few observations for the requested estimate."""


class DegenerateTailError(SuperParetoError, ArithmeticError):
    """The upper order statistics carry no spread, so the tail index is undefined."""


class DivergentMomentError(SuperParetoError, ArithmeticError):
    """A requested moment of a heavy-tailed distribution is infinite."""


class OutOfRangeError(SuperParetoError, ValueError):
    """No inverse temperature reproduces the requested demand."""


class NormalizabilityError(SuperParetoError, ValueError):
    """A weight or demand law cannot be normalized on its support."""


class OutOfTheoryError(SuperParetoError, ValueError):
    """Pareto indices outside the range where the transfer relations hold."""


class QuadratureError(SuperParetoError, ArithmeticError):
    """Numerical integration failed to reach its tolerance."""

    def __init__(self, message, *, estimate=None, error=None, info=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.info = info


class SchemaError(SuperParetoError, ValueError):
    """An input file does not match the expected column layout."""


class InconsistencyWarning(UserWarning):
    """Fitted indices violate the ordering the theory requires."""


class CutWarning(UserWarning):
    """An outlier cut removed every record."""
