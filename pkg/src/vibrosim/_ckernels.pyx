# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled time-stepping loops.

Call signatures mirror ``_pykernels`` exactly. Every kernel advances in
place: on return ``prev`` and ``curr`` hold the last two states, and ``out``
holds one new state per row. The return value is the index of the first row
that contains a non-finite value or exceeds ``limit`` in magnitude, or -1.
"""

import numpy as np

from libc.math cimport fabs


def fdm_advance(double[::1] prev, double[::1] curr, double[:, ::1] out,
                double a, double b, double c, double limit):
    cdef Py_ssize_t steps = out.shape[0]
    cdef Py_ssize_t n = curr.shape[0]
    cdef Py_ssize_t k, i
    cdef double v
    cdef int bad = -1
    with nogil:
        for k in range(steps):
            out[k, 0] = 0.0
            out[k, n - 1] = 0.0
            for i in range(1, n - 1):
                v = a * (curr[i - 1] + curr[i + 1]) + b * curr[i] + c * prev[i]
                out[k, i] = v
                if not fabs(v) <= limit:
                    bad = k
            for i in range(n):
                prev[i] = curr[i]
                curr[i] = out[k, i]
            if bad >= 0:
                break
    return bad


def factor_mass(m_sub, m_diag, m_sup):
    """Thomas factorisation of a tridiagonal matrix, done once per run.

    Returns ``(m_sub, cprime, inv_denom)`` for :func:`fem_advance`.
    """
    sub = np.ascontiguousarray(m_sub, dtype=np.float64)
    diag = np.asarray(m_diag, dtype=np.float64)
    sup = np.asarray(m_sup, dtype=np.float64)
    n = diag.shape[0]
    cprime = np.zeros(n)
    inv_denom = np.zeros(n)
    denom = diag[0]
    for i in range(n):
        if i > 0:
            denom = diag[i] - sub[i] * cprime[i - 1]
        if denom == 0.0:
            raise ZeroDivisionError("singular mass matrix")
        inv_denom[i] = 1.0 / denom
        if i < n - 1:
            cprime[i] = sup[i] / denom
    return sub, cprime, inv_denom


def fem_advance(double[::1] prev, double[::1] curr, double[:, ::1] out,
                double[::1] k_sub, double[::1] k_diag, double[::1] k_sup,
                tuple factor, double dt2, double limit):
    cdef double[::1] m_sub = factor[0]
    cdef double[::1] m_cprime = factor[1]
    cdef double[::1] m_inv_denom = factor[2]
    cdef Py_ssize_t steps = out.shape[0]
    cdef Py_ssize_t n = curr.shape[0]
    cdef Py_ssize_t k, i
    cdef double r, v
    cdef int bad = -1
    cdef double[::1] y = curr.copy()
    with nogil:
        for k in range(steps):
            # y <- M^{-1} K curr, Thomas sweep with the factorisation precomputed
            r = k_diag[0] * curr[0] + k_sup[0] * curr[1]
            y[0] = r * m_inv_denom[0]
            for i in range(1, n - 1):
                r = k_sub[i] * curr[i - 1] + k_diag[i] * curr[i] + k_sup[i] * curr[i + 1]
                y[i] = (r - m_sub[i] * y[i - 1]) * m_inv_denom[i]
            r = k_sub[n - 1] * curr[n - 2] + k_diag[n - 1] * curr[n - 1]
            y[n - 1] = (r - m_sub[n - 1] * y[n - 2]) * m_inv_denom[n - 1]
            for i in range(n - 2, -1, -1):
                y[i] = y[i] - m_cprime[i] * y[i + 1]

            out[k, 0] = 0.0
            out[k, n - 1] = 0.0
            for i in range(1, n - 1):
                v = 2.0 * curr[i] - prev[i] - dt2 * y[i]
                out[k, i] = v
                if not fabs(v) <= limit:
                    bad = k
            for i in range(n):
                prev[i] = curr[i]
                curr[i] = out[k, i]
            if bad >= 0:
                break
    return bad
