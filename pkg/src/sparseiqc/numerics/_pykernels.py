"""Pure numpy implementations of the dense numerical kernels.

Same algorithms as the compiled ``_ckernels`` extension (cyclic Jacobi
eigensolver, in-order semidefinite Cholesky, partial-pivot LU); selected
as a fallback at import time by :mod:`sparseiqc.numerics`.
"""

import math

import numpy as np

from ..errors import ConvergenceError, IndefiniteMatrixError, SingularMatrixError

BACKEND_NAME = "python"


def _offdiag_fro(a):
    # summed directly (not total minus diagonal) to avoid cancellation
    m2 = np.abs(a) ** 2
    np.fill_diagonal(m2, 0.0)
    return math.sqrt(float(np.sum(m2)))


def _jacobi_ct(app, aqq, m):
    # 2x2 symmetric Schur rotation for [[app, m], [m, aqq]], m > 0
    tau = (aqq - app) / (2.0 * m)
    if tau >= 0.0:
        t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
    else:
        t = 1.0 / (tau - math.sqrt(1.0 + tau * tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    return c, t * c, t


def eigh_real(a, max_sweeps, stop_tol, skip_tol):
    """Cyclic Jacobi for real symmetric ``a``.

    Returns eigenvalues ascending and orthonormal eigenvectors (columns).
    """
    a = np.array(a, dtype=np.float64, order="C")
    n = a.shape[0]
    v = np.eye(n)
    if n < 2:
        return np.diagonal(a).astype(np.float64).copy(), v
    for sweep in range(max_sweeps + 1):
        if _offdiag_fro(a) <= stop_tol:
            break
        if sweep == max_sweeps:
            raise ConvergenceError(
                "jacobi eigensolver: no convergence in %d sweeps" % max_sweeps
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                m = abs(apq)
                if m <= skip_tol:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                sgn = 1.0 if apq > 0 else -1.0
                c, s, t = _jacobi_ct(app, aqq, m)
                s *= sgn
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :].copy()
                a[p, :] = c * rowp - s * rowq
                a[q, :] = s * rowp + c * rowq
                a[p, p] = app - t * m
                a[q, q] = aqq + t * m
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    w = np.diagonal(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], np.ascontiguousarray(v[:, order])


def eigh_complex(a, max_sweeps, stop_tol, skip_tol):
    """Cyclic Jacobi for complex Hermitian ``a``."""
    a = np.array(a, dtype=np.complex128, order="C")
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    if n < 2:
        return np.diagonal(a).real.astype(np.float64).copy(), v
    for sweep in range(max_sweeps + 1):
        if _offdiag_fro(a) <= stop_tol:
            break
        if sweep == max_sweeps:
            raise ConvergenceError(
                "jacobi eigensolver: no convergence in %d sweeps" % max_sweeps
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                m = abs(apq)
                if m <= skip_tol:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                phase = apq / m
                pc = phase.conjugate()
                c, s, t = _jacobi_ct(app, aqq, m)
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = c * colp - (s * pc) * colq
                a[:, q] = s * colp + (c * pc) * colq
                rowp = a[p, :].copy()
                rowq = a[q, :].copy()
                a[p, :] = c * rowp - (s * phase) * rowq
                a[q, :] = s * rowp + (c * phase) * rowq
                a[p, p] = app - t * m
                a[q, q] = aqq + t * m
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - (s * pc) * vq
                v[:, q] = s * vp + (c * pc) * vq
    w = np.diagonal(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], np.ascontiguousarray(v[:, order])


def chol_semidef(a, pivot_tol, indef_tol, col_tol):
    """In-order (unpivoted) Cholesky of a PSD complex Hermitian matrix.

    Columns whose pivot falls below ``pivot_tol`` are zeroed; a pivot below
    ``-indef_tol`` or a zeroed column with residual entries above
    ``col_tol`` raises ``IndefiniteMatrixError``.  The fixed elimination
    order keeps structural zeros exact.
    """
    a = np.array(a, dtype=np.complex128, order="C")
    n = a.shape[0]
    low = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        if j:
            d = a[j, j].real - float(np.sum(np.abs(low[j, :j]) ** 2))
        else:
            d = a[j, j].real
        if d <= pivot_tol:
            if d < -indef_tol:
                raise IndefiniteMatrixError(
                    "matrix is indefinite: pivot %g at column %d" % (d, j)
                )
            if j + 1 < n:
                if j:
                    resid = a[j + 1 :, j] - low[j + 1 :, :j] @ np.conj(low[j, :j])
                else:
                    resid = a[j + 1 :, j]
                if resid.size and float(np.max(np.abs(resid))) > col_tol:
                    raise IndefiniteMatrixError(
                        "matrix is indefinite: residual column %d exceeds "
                        "tolerance with negligible pivot" % j
                    )
            continue
        ljj = math.sqrt(d)
        low[j, j] = ljj
        if j + 1 < n:
            if j:
                resid = a[j + 1 :, j] - low[j + 1 :, :j] @ np.conj(low[j, :j])
            else:
                resid = a[j + 1 :, j].copy()
            low[j + 1 :, j] = resid / ljj
    return low


def lu_solve(a, b, sing_tol):
    """Solve ``a x = b`` by partial-pivot LU; raises on tiny pivots."""
    a = np.array(a, dtype=np.complex128, order="C")
    b = np.array(b, dtype=np.complex128, order="C")
    n = a.shape[0]
    if n == 0:
        return b.copy()
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        pval = abs(a[piv, k])
        if pval <= sing_tol:
            raise SingularMatrixError(
                "matrix is singular to working precision (pivot %g)" % pval,
                sigma_estimate=pval,
            )
        if piv != k:
            a[[k, piv], :] = a[[piv, k], :]
            b[[k, piv], :] = b[[piv, k], :]
        if k + 1 < n:
            fac = a[k + 1 :, k] / a[k, k]
            a[k + 1 :, k + 1 :] -= np.outer(fac, a[k, k + 1 :])
            b[k + 1 :, :] -= np.outer(fac, b[k, :])
            a[k + 1 :, k] = fac
    x = b
    for k in range(n - 1, -1, -1):
        x[k, :] /= a[k, k]
        if k:
            x[:k, :] -= np.outer(a[:k, k], x[k, :])
    return x
