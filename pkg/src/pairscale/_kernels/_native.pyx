# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels: C translation of ``_pure``."""

from libc.math cimport erfc, exp, log, log1p, sqrt, M_PI

import numpy as np

cdef double SQRT2 = sqrt(2.0)
cdef double HALF_LOG_2PI = 0.5 * log(2.0 * M_PI)


cdef double _log_ndtr1(double x) noexcept nogil:
    # log1p form above zero: keeps relative accuracy as ln Phi -> 0
    cdef double u, s
    if x > 0.0:
        return log1p(-0.5 * erfc(x / SQRT2))
    if x >= -14.0:
        return log(0.5 * erfc(-x / SQRT2))
    # Mills-ratio asymptotic series, ten signed double-factorial terms
    u = 1.0 / (x * x)
    s = u * (-1.0 + u * (3.0 + u * (-15.0 + u * (105.0 + u * (-945.0
        + u * (10395.0 + u * (-135135.0 + u * (2027025.0
        + u * (-34459425.0 + u * 654729075.0)))))))))
    return -0.5 * x * x - log(-x) - HALF_LOG_2PI + log1p(s)


def log_ndtr(x):
    """log of the standard normal CDF, elementwise."""
    arr = np.asarray(x, dtype=np.float64)
    flat = np.ascontiguousarray(arr.ravel())
    out = np.empty_like(flat)
    cdef const double[::1] xv = flat
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = xv.shape[0]
    with nogil:
        for i in range(n):
            ov[i] = _log_ndtr1(xv[i])
    return out.reshape(arr.shape)


def case_v_system(m, q, double prior_weight):
    """Objective, gradient, and Hessian of the Case V MAP problem."""
    cdef const double[:, ::1] mv = np.ascontiguousarray(m, dtype=np.float64)
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef Py_ssize_t n = qv.shape[0], i, j
    grad = np.zeros(n, dtype=np.float64)
    hess = np.zeros((n, n), dtype=np.float64)
    cdef double[::1] gv = grad
    cdef double[:, ::1] hv = hess
    cdef double objective = 0.0
    cdef double wij, d, lp, r, rp
    with nogil:
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                wij = mv[i, j]
                if wij == 0.0:
                    continue
                d = qv[i] - qv[j]
                lp = _log_ndtr1(d)
                objective += wij * lp
                r = exp(-0.5 * d * d - HALF_LOG_2PI - lp)
                gv[i] += wij * r
                gv[j] -= wij * r
                rp = wij * (-d * r - r * r)
                hv[i, i] += rp
                hv[j, j] += rp
                hv[i, j] -= rp
                hv[j, i] -= rp
        if prior_weight != 0.0:
            for i in range(n):
                objective -= 0.5 * prior_weight * qv[i] * qv[i]
                gv[i] -= prior_weight * qv[i]
                hv[i, i] -= prior_weight
    return objective, grad, hess
