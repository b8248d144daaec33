"""Robust stability certification for sparse interconnections of
uncertain LTI subsystems.

The package assembles frequency-gridded IQC feasibility LMIs for
interconnected uncertain systems, exploits chordal sparsity to split
them along a clique tree, and solves them either centrally or with a
simulated network of per-clique agents.
"""

from .errors import (
    ConvergenceError,
    DimensionError,
    EvaluationError,
    IndefiniteMatrixError,
    PatternError,
    SingularMatrixError,
    SparseIqcError,
    WellPosednessError,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DimensionError",
    "EvaluationError",
    "IndefiniteMatrixError",
    "PatternError",
    "SingularMatrixError",
    "SparseIqcError",
    "WellPosednessError",
    "__version__",
]
