"""Compiled dense numerical kernels.

Cyclic Jacobi eigensolvers (real symmetric and complex Hermitian),
in-order semidefinite Cholesky, and partial-pivot LU.  Mirrors
``_pykernels``; the wrappers in :mod:`sparseiqc.numerics` pick whichever
backend imported.
"""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport fabs, sqrt

from ..errors import ConvergenceError, IndefiniteMatrixError, SingularMatrixError

cnp.import_array()

BACKEND_NAME = "compiled"


cdef inline double _cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef double _offdiag_fro_r(double[:, ::1] a, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, j
    cdef double acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += a[i, j] * a[i, j]
    return sqrt(acc)


cdef double _offdiag_fro_c(double complex[:, ::1] a, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, j
    cdef double acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += _cabs2(a[i, j])
    return sqrt(acc)


def eigh_real(object a_in, int max_sweeps, double stop_tol, double skip_tol):
    """Cyclic Jacobi for real symmetric matrices.

    Returns eigenvalues ascending and orthonormal eigenvectors (columns).
    """
    cdef cnp.ndarray a_arr = np.array(a_in, dtype=np.float64, order="C")
    cdef Py_ssize_t n = a_arr.shape[0]
    cdef cnp.ndarray v_arr = np.eye(n)
    if n < 2:
        return np.diagonal(a_arr).astype(np.float64).copy(), v_arr
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, k
    cdef int sweep
    cdef double apq, m, app, aqq, tau, t, c, s, xp, xq
    cdef bint converged = False
    with nogil:
        for sweep in range(max_sweeps + 1):
            if _offdiag_fro_r(a, n) <= stop_tol:
                converged = True
                break
            if sweep == max_sweeps:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    m = fabs(apq)
                    if m <= skip_tol:
                        continue
                    app = a[p, p]
                    aqq = a[q, q]
                    tau = (aqq - app) / (2.0 * m)
                    if tau >= 0.0:
                        t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                    else:
                        t = 1.0 / (tau - sqrt(1.0 + tau * tau))
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = t * c
                    if apq < 0.0:
                        s = -s
                    for k in range(n):
                        xp = a[k, p]
                        xq = a[k, q]
                        a[k, p] = c * xp - s * xq
                        a[k, q] = s * xp + c * xq
                    for k in range(n):
                        xp = a[p, k]
                        xq = a[q, k]
                        a[p, k] = c * xp - s * xq
                        a[q, k] = s * xp + c * xq
                    a[p, p] = app - t * m
                    a[q, q] = aqq + t * m
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for k in range(n):
                        xp = v[k, p]
                        xq = v[k, q]
                        v[k, p] = c * xp - s * xq
                        v[k, q] = s * xp + c * xq
    if not converged:
        raise ConvergenceError(
            "jacobi eigensolver: no convergence in %d sweeps" % max_sweeps
        )
    w = np.diagonal(a_arr).copy()
    order = np.argsort(w, kind="stable")
    return w[order], np.ascontiguousarray(v_arr[:, order])


def eigh_complex(object a_in, int max_sweeps, double stop_tol, double skip_tol):
    """Cyclic Jacobi for complex Hermitian matrices."""
    cdef cnp.ndarray a_arr = np.array(a_in, dtype=np.complex128, order="C")
    cdef Py_ssize_t n = a_arr.shape[0]
    cdef cnp.ndarray v_arr = np.eye(n, dtype=np.complex128)
    if n < 2:
        return np.diagonal(a_arr).real.astype(np.float64).copy(), v_arr
    cdef double complex[:, ::1] a = a_arr
    cdef double complex[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, k
    cdef int sweep
    cdef double m, app, aqq, tau, t, c, s
    cdef double complex apq, phase, pc, zp, zq, sp, sc, spc, cpc
    cdef bint converged = False
    with nogil:
        for sweep in range(max_sweeps + 1):
            if _offdiag_fro_c(a, n) <= stop_tol:
                converged = True
                break
            if sweep == max_sweeps:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    m = sqrt(_cabs2(apq))
                    if m <= skip_tol:
                        continue
                    app = a[p, p].real
                    aqq = a[q, q].real
                    phase = apq / m
                    pc = phase.conjugate()
                    tau = (aqq - app) / (2.0 * m)
                    if tau >= 0.0:
                        t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                    else:
                        t = 1.0 / (tau - sqrt(1.0 + tau * tau))
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = t * c
                    spc = s * pc
                    cpc = c * pc
                    sp = s * phase
                    sc = c * phase
                    for k in range(n):
                        zp = a[k, p]
                        zq = a[k, q]
                        a[k, p] = c * zp - spc * zq
                        a[k, q] = s * zp + cpc * zq
                    for k in range(n):
                        zp = a[p, k]
                        zq = a[q, k]
                        a[p, k] = c * zp - sp * zq
                        a[q, k] = s * zp + sc * zq
                    a[p, p] = app - t * m
                    a[q, q] = aqq + t * m
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for k in range(n):
                        zp = v[k, p]
                        zq = v[k, q]
                        v[k, p] = c * zp - spc * zq
                        v[k, q] = s * zp + cpc * zq
    if not converged:
        raise ConvergenceError(
            "jacobi eigensolver: no convergence in %d sweeps" % max_sweeps
        )
    w = np.diagonal(a_arr).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], np.ascontiguousarray(v_arr[:, order])


def chol_semidef(object a_in, double pivot_tol, double indef_tol, double col_tol):
    """In-order (unpivoted) Cholesky of a PSD complex Hermitian matrix.

    Columns whose pivot falls below ``pivot_tol`` are zeroed; a pivot below
    ``-indef_tol`` or a zeroed column with residual entries above
    ``col_tol`` raises ``IndefiniteMatrixError``.  The fixed elimination
    order keeps structural zeros exact.
    """
    cdef cnp.ndarray a_arr = np.array(a_in, dtype=np.complex128, order="C")
    cdef Py_ssize_t n = a_arr.shape[0]
    cdef cnp.ndarray l_arr = np.zeros((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] a = a_arr
    cdef double complex[:, ::1] low = l_arr
    cdef Py_ssize_t i, j, k
    cdef double d, ljj, worst
    cdef double complex acc
    cdef int bad_col = -1
    cdef double bad_val = 0.0
    with nogil:
        for j in range(n):
            d = a[j, j].real
            for k in range(j):
                d -= _cabs2(low[j, k])
            if d <= pivot_tol:
                if d < -indef_tol:
                    bad_col = j
                    bad_val = d
                    break
                worst = 0.0
                for i in range(j + 1, n):
                    acc = a[i, j]
                    for k in range(j):
                        acc = acc - low[i, k] * low[j, k].conjugate()
                    if _cabs2(acc) > worst:
                        worst = _cabs2(acc)
                if sqrt(worst) > col_tol:
                    bad_col = j
                    bad_val = sqrt(worst)
                    break
                continue
            ljj = sqrt(d)
            low[j, j] = ljj
            for i in range(j + 1, n):
                acc = a[i, j]
                for k in range(j):
                    acc = acc - low[i, k] * low[j, k].conjugate()
                low[i, j] = acc / ljj
    if bad_col >= 0:
        if bad_val < 0.0:
            raise IndefiniteMatrixError(
                "matrix is indefinite: pivot %g at column %d" % (bad_val, bad_col)
            )
        raise IndefiniteMatrixError(
            "matrix is indefinite: residual column %d exceeds tolerance "
            "with negligible pivot" % bad_col
        )
    return l_arr


def lu_solve(object a_in, object b_in, double sing_tol):
    """Solve ``a x = b`` by partial-pivot LU; raises on tiny pivots."""
    cdef cnp.ndarray a_arr = np.array(a_in, dtype=np.complex128, order="C")
    cdef cnp.ndarray b_arr = np.array(b_in, dtype=np.complex128, order="C")
    cdef Py_ssize_t n = a_arr.shape[0]
    cdef Py_ssize_t nrhs = b_arr.shape[1]
    if n == 0:
        return b_arr
    cdef double complex[:, ::1] a = a_arr
    cdef double complex[:, ::1] b = b_arr
    cdef Py_ssize_t k, i, j, piv
    cdef double pval, best
    cdef double complex fac, tmp
    cdef int sing_at = -1
    cdef double sing_val = 0.0
    with nogil:
        for k in range(n):
            piv = k
            best = sqrt(_cabs2(a[k, k]))
            for i in range(k + 1, n):
                pval = sqrt(_cabs2(a[i, k]))
                if pval > best:
                    best = pval
                    piv = i
            if best <= sing_tol:
                sing_at = k
                sing_val = best
                break
            if piv != k:
                for j in range(n):
                    tmp = a[k, j]
                    a[k, j] = a[piv, j]
                    a[piv, j] = tmp
                for j in range(nrhs):
                    tmp = b[k, j]
                    b[k, j] = b[piv, j]
                    b[piv, j] = tmp
            for i in range(k + 1, n):
                fac = a[i, k] / a[k, k]
                a[i, k] = fac
                for j in range(k + 1, n):
                    a[i, j] = a[i, j] - fac * a[k, j]
                for j in range(nrhs):
                    b[i, j] = b[i, j] - fac * b[k, j]
        if sing_at < 0:
            for k in range(n - 1, -1, -1):
                for j in range(nrhs):
                    b[k, j] = b[k, j] / a[k, k]
                for i in range(k):
                    for j in range(nrhs):
                        b[i, j] = b[i, j] - a[i, k] * b[k, j]
    if sing_at >= 0:
        raise SingularMatrixError(
            "matrix is singular to working precision (pivot %g)" % sing_val,
            sigma_estimate=sing_val,
        )
    return b_arr
