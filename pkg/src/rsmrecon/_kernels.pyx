# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the hot kernels in rsmrecon._kernels_py.

Same algorithms and boundary conventions (rows replicate, columns wrap);
results agree with the numpy fallback to floating-point noise.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

BACKEND = "cython"


cdef void _grad(double[:, ::1] u, double[:, ::1] gx, double[:, ::1] gy,
                Py_ssize_t m, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    for i in range(m):
        for j in range(n):
            gx[i, j] = (u[i + 1, j] - u[i, j]) if i < m - 1 else 0.0
            gy[i, j] = u[i, (j + 1) % n] - u[i, j]


cdef void _div(double[:, ::1] px, double[:, ::1] py, double[:, ::1] out,
               Py_ssize_t m, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    for i in range(m):
        for j in range(n):
            out[i, j] = px[i, j] + py[i, j] - py[i, (j + n - 1) % n]
            if i > 0:
                out[i, j] -= px[i - 1, j]


def tv_prox(v, double tau, int max_iter=50, double tol=1e-5):
    """Prox of tau * isotropic TV via Chambolle's dual projection."""
    v = np.ascontiguousarray(v, dtype=np.float64)
    if tau <= 0:
        return v.copy()
    cdef double[:, ::1] vv = v
    cdef Py_ssize_t m = vv.shape[0], n = vv.shape[1]
    cdef cnp.ndarray px_a = np.zeros((m, n)), py_a = np.zeros((m, n))
    cdef double[:, ::1] px = px_a, py = py_a
    cdef double[:, ::1] work = np.empty((m, n))
    cdef double[:, ::1] gx = np.empty((m, n)), gy = np.empty((m, n))
    cdef double sigma = 0.249
    cdef double norm, pn, delta, diff
    cdef Py_ssize_t i, j
    cdef int it
    with nogil:
        for it in range(max_iter):
            _div(px, py, work, m, n)
            for i in range(m):
                for j in range(n):
                    work[i, j] -= vv[i, j] / tau
            _grad(work, gx, gy, m, n)
            delta = 0.0
            for i in range(m):
                for j in range(n):
                    norm = sqrt(gx[i, j] * gx[i, j] + gy[i, j] * gy[i, j])
                    pn = (px[i, j] + sigma * gx[i, j]) / (1.0 + sigma * norm)
                    diff = fabs(pn - px[i, j])
                    if diff > delta:
                        delta = diff
                    px[i, j] = pn
                    pn = (py[i, j] + sigma * gy[i, j]) / (1.0 + sigma * norm)
                    diff = fabs(pn - py[i, j])
                    if diff > delta:
                        delta = diff
                    py[i, j] = pn
            if delta < tol:
                break
    _div(px, py, work, m, n)
    out = np.empty((m, n))
    cdef double[:, ::1] ov = out
    with nogil:
        for i in range(m):
            for j in range(n):
                ov[i, j] = vv[i, j] - tau * work[i, j]
    return out


cdef double _median_of(double* buf, Py_ssize_t k) noexcept nogil:
    # insertion sort; window sizes are tiny (<= 49 in practice)
    cdef Py_ssize_t i, j
    cdef double key
    for i in range(1, k):
        key = buf[i]
        j = i - 1
        while j >= 0 and buf[j] > key:
            buf[j + 1] = buf[j]
            j -= 1
        buf[j + 1] = key
    if k % 2 == 1:
        return buf[k // 2]
    return 0.5 * (buf[k // 2 - 1] + buf[k // 2])


def median_filter(a, int radius=1):
    """(2r+1)^2 median window, rows replicated, columns wrapped."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] av = a
    cdef Py_ssize_t m = av.shape[0], n = av.shape[1]
    cdef int r = radius
    cdef Py_ssize_t size = 2 * r + 1
    out = np.empty((m, n))
    cdef double[:, ::1] ov = out
    cdef double[::1] buf = np.empty(size * size)
    cdef Py_ssize_t i, j, di, dj, ii, jj, k
    with nogil:
        for i in range(m):
            for j in range(n):
                k = 0
                for di in range(-r, r + 1):
                    ii = i + di
                    if ii < 0:
                        ii = 0
                    elif ii >= m:
                        ii = m - 1
                    for dj in range(-r, r + 1):
                        jj = (j + dj) % n
                        if jj < 0:
                            jj += n
                        buf[k] = av[ii, jj]
                        k += 1
                ov[i, j] = _median_of(&buf[0], k)
    return out
