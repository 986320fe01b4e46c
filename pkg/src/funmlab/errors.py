"""Exception types shared across the toolkit."""


class FunmlabError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(FunmlabError):
    """Input has the wrong shape, size, or symmetry."""


class MatrixMarketParseError(FunmlabError):
    """A Matrix Market file could not be parsed."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class UnsupportedFormatError(FunmlabError):
    """File declares a field or symmetry this toolkit does not handle."""


class DomainError(FunmlabError):
    """A value lies outside the mathematical domain of an operation."""


class CapacityError(FunmlabError):
    """Problem size exceeds a configured cap."""


class NonpositiveCurvatureError(FunmlabError):
    """Conjugate gradient met a direction of nonpositive curvature.

    Signals that the operator is not positive definite.
    """


class SolverFailureError(FunmlabError):
    """An iterative solver exhausted its iteration cap."""
