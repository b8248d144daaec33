"""Self-contained dense numerical kernels.

Two interchangeable backends implement the same algorithms: the compiled
``_ckernels`` extension (Cython) and the pure numpy ``_pykernels``
module.  The compiled backend is preferred; set the environment variable
``SPARSEIQC_PURE_PYTHON=1`` before import to force the fallback.  The
active backend is reported in :data:`BACKEND`.

Public operations:

- :func:`herm_eig` -- cyclic Jacobi eigendecomposition of Hermitian or
  real symmetric matrices,
- :func:`semidef_sqrt` -- semidefinite-safe square-root factorization
  ``P = L L*`` in the given elimination order,
- :func:`solve_dense` -- dense complex solve with partial pivoting,
- :func:`lstsq` -- deterministic least squares with minimum-norm
  handling of rank deficiency.

All kernels are deterministic and reentrant.
"""

import math
import os
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError

_FORCE_PY = os.environ.get("SPARSEIQC_PURE_PYTHON", "") not in ("", "0")

if _FORCE_PY:
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        from . import _pykernels as _impl

BACKEND = _impl.BACKEND_NAME


@dataclass
class KernelTolerances:
    """Central tolerance configuration for the kernels."""

    hermitian_check: float = 1e-12
    eig_stop: float = 1e-12
    eig_sweeps: int = 30
    sqrt_pivot: float = 1e-10
    sqrt_indef_factor: float = 100.0
    solve_singularity: float = 1e-13
    lstsq_rcond: float = 1e-12


TOLERANCES = KernelTolerances()


def as_dense_matrix(a, allow_complex=True):
    """Validate and convert to a contiguous finite 2-d array."""
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise DimensionError("expected a 2-d matrix, got shape %s" % (arr.shape,))
    if np.iscomplexobj(arr):
        if not allow_complex:
            raise DimensionError("expected a real matrix")
        arr = np.ascontiguousarray(arr, dtype=np.complex128)
    else:
        arr = np.ascontiguousarray(arr, dtype=np.float64)
    if arr.size and not np.all(np.isfinite(arr.view(np.float64))):
        raise ValueError("matrix contains NaN or Inf entries")
    return arr


def _check_hermitian(a, tol):
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    dev = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if dev > tol * max(scale, 1e-300):
        raise ValueError(
            "matrix is not Hermitian: max deviation %g exceeds %g * %g"
            % (dev, tol, scale)
        )


def herm_eig(a, max_sweeps=None):
    """Eigendecomposition of a Hermitian (or real symmetric) matrix.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and orthonormal
    eigenvector columns ``v``.  Uses cyclic Jacobi iteration; raises
    ``ConvergenceError`` if the sweep budget is exhausted.
    """
    arr = as_dense_matrix(a)
    n = arr.shape[0]
    if arr.shape[1] != n:
        raise DimensionError("herm_eig requires a square matrix")
    _check_hermitian(arr, TOLERANCES.hermitian_check)
    if n == 0:
        dt = np.complex128 if np.iscomplexobj(arr) else np.float64
        return np.zeros(0), np.zeros((0, 0), dtype=dt)
    sweeps = TOLERANCES.eig_sweeps if max_sweeps is None else max_sweeps
    arr = 0.5 * (arr + arr.conj().T)
    scale = float(np.linalg.norm(arr))
    stop = TOLERANCES.eig_stop * max(1.0, scale)
    skip = stop / (10.0 * n)
    if np.iscomplexobj(arr):
        return _impl.eigh_complex(arr, sweeps, stop, skip)
    return _impl.eigh_real(arr, sweeps, stop, skip)


def semidef_sqrt(p, pivot_tol=None):
    """Square-root factor ``L`` with ``P = L L*`` for PSD ``P``.

    Factorization runs in the given row/column order (no permutation), so
    chordal structure in ``P`` is inherited by the column supports of
    ``L``.  Columns with pivots below tolerance are zeroed; indefinite
    input raises ``IndefiniteMatrixError``.
    """
    arr = as_dense_matrix(p)
    n = arr.shape[0]
    if arr.shape[1] != n:
        raise DimensionError("semidef_sqrt requires a square matrix")
    _check_hermitian(arr, TOLERANCES.hermitian_check)
    was_real = not np.iscomplexobj(arr)
    scale = float(np.max(np.abs(arr))) if n else 0.0
    if pivot_tol is None:
        pivot_tol = TOLERANCES.sqrt_pivot * max(1.0, scale)
    indef_tol = TOLERANCES.sqrt_indef_factor * pivot_tol
    col_tol = 10.0 * math.sqrt(pivot_tol * max(1.0, scale)) + 1e3 * np.finfo(
        float
    ).eps * max(1.0, scale)
    low = _impl.chol_semidef(arr.astype(np.complex128), pivot_tol, indef_tol, col_tol)
    if was_real:
        return low.real.copy()
    return low


def solve_dense(a, b):
    """Solve ``A X = B`` for square complex ``A`` by partial-pivot LU.

    Raises ``SingularMatrixError`` (with a crude smallest-pivot estimate)
    when a pivot falls below the singularity threshold.
    """
    arr = as_dense_matrix(a)
    n = arr.shape[0]
    if arr.shape[1] != n:
        raise DimensionError("solve_dense requires a square matrix")
    rhs = np.asarray(b)
    vector_rhs = rhs.ndim == 1
    if vector_rhs:
        rhs = rhs.reshape(n, 1)
    rhs = as_dense_matrix(rhs)
    if rhs.shape[0] != n:
        raise DimensionError(
            "right-hand side has %d rows, expected %d" % (rhs.shape[0], n)
        )
    was_real = not (np.iscomplexobj(arr) or np.iscomplexobj(rhs))
    scale = float(np.max(np.abs(arr))) if n else 0.0
    sing_tol = TOLERANCES.solve_singularity * max(scale, 1e-300) * max(n, 1)
    x = _impl.lu_solve(
        arr.astype(np.complex128), rhs.astype(np.complex128), sing_tol
    )
    if was_real:
        x = x.real.copy()
    if vector_rhs:
        return x.reshape(n)
    return x


@dataclass
class LstsqResult:
    """Least-squares solution with a rank report."""

    x: np.ndarray
    rank: int
    rank_deficient: bool


def lstsq(a, b, rcond=None):
    """Minimize ``||A x - b||_2``; minimum-norm solution if rank deficient.

    Solved through the eigendecomposition of the Gram matrix ``A* A``,
    which keeps the kernel deterministic and reuses :func:`herm_eig`.
    """
    arr = as_dense_matrix(a)
    rhs = np.asarray(b)
    vector_rhs = rhs.ndim == 1
    if vector_rhs:
        rhs = rhs.reshape(-1, 1)
    rhs = as_dense_matrix(rhs)
    if rhs.shape[0] != arr.shape[0]:
        raise DimensionError(
            "lstsq: A has %d rows but b has %d" % (arr.shape[0], rhs.shape[0])
        )
    if rcond is None:
        rcond = TOLERANCES.lstsq_rcond
    ncols = arr.shape[1]
    was_real = not (np.iscomplexobj(arr) or np.iscomplexobj(rhs))
    gram = arr.conj().T @ arr
    gram = 0.5 * (gram + gram.conj().T)
    w, v = herm_eig(gram)
    wmax = float(w[-1]) if ncols else 0.0
    cut = max(wmax * rcond * max(arr.shape), 0.0)
    inv = np.where(w > cut, 1.0 / np.where(w > cut, w, 1.0), 0.0)
    rank = int(np.count_nonzero(w > cut))
    atb = arr.conj().T @ rhs
    x = v @ (inv[:, None] * (v.conj().T @ atb))
    if was_real:
        x = x.real.copy()
    if vector_rhs:
        x = x.reshape(ncols)
    return LstsqResult(x=x, rank=rank, rank_deficient=rank < ncols)
