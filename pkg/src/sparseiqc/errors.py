"""Exception types shared across the package."""


class SparseIqcError(Exception):
    """Base class for all package errors."""


class DimensionError(SparseIqcError, ValueError):
    """Inconsistent matrix or block dimensions."""


class EvaluationError(SparseIqcError):
    """Frequency response evaluation failed at a specific frequency."""

    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class WellPosednessError(SparseIqcError):
    """The interconnection loop matrix is (numerically) singular."""

    def __init__(self, message, omega=None, sigma_min=None):
        super().__init__(message)
        self.omega = omega
        self.sigma_min = sigma_min


class PatternError(SparseIqcError, ValueError):
    """A matrix entry falls outside the expected sparsity pattern."""


class SingularMatrixError(SparseIqcError):
    """Dense solve hit a pivot below the singularity threshold."""

    def __init__(self, message, sigma_estimate=None):
        super().__init__(message)
        self.sigma_estimate = sigma_estimate


class IndefiniteMatrixError(SparseIqcError):
    """Matrix expected (semi)definite is indefinite beyond tolerance."""


class ConvergenceError(SparseIqcError):
    """An iterative kernel exhausted its iteration budget."""
