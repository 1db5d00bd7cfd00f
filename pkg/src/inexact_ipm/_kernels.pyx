# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sparse kernels for compressed-column matrices."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t idx_t


def csc_matvec(const idx_t[::1] indptr, const idx_t[::1] indices,
               const double[::1] data, const double[::1] v, Py_ssize_t m):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t j, k
    cdef double vj
    out = np.zeros(m, dtype=np.float64)
    cdef double[::1] y = out
    with nogil:
        for j in range(n):
            vj = v[j]
            if vj == 0.0:
                continue
            for k in range(indptr[j], indptr[j + 1]):
                y[indices[k]] += data[k] * vj
    return out


def csc_rmatvec(const idx_t[::1] indptr, const idx_t[::1] indices,
                const double[::1] data, const double[::1] u):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t j, k
    cdef double acc
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] y = out
    with nogil:
        for j in range(n):
            acc = 0.0
            for k in range(indptr[j], indptr[j + 1]):
                acc += data[k] * u[indices[k]]
            y[j] = acc
    return out


def csc_normal_apply(const idx_t[::1] indptr, const idx_t[::1] indices,
                     const double[::1] data, const double[::1] d2,
                     const double[::1] v):
    """Return A diag(d2) A^T v in a single pass over the columns."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t m = v.shape[0]
    cdef Py_ssize_t j, k, kb, ke
    cdef double t
    out = np.zeros(m, dtype=np.float64)
    cdef double[::1] y = out
    with nogil:
        for j in range(n):
            kb = indptr[j]
            ke = indptr[j + 1]
            t = 0.0
            for k in range(kb, ke):
                t += data[k] * v[indices[k]]
            t *= d2[j]
            if t == 0.0:
                continue
            for k in range(kb, ke):
                y[indices[k]] += data[k] * t
    return out


def csc_normal_diagonal(const idx_t[::1] indptr, const idx_t[::1] indices,
                        const double[::1] data, const double[::1] d2,
                        Py_ssize_t m):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t j, k
    out = np.zeros(m, dtype=np.float64)
    cdef double[::1] y = out
    with nogil:
        for j in range(n):
            for k in range(indptr[j], indptr[j + 1]):
                y[indices[k]] += data[k] * data[k] * d2[j]
    return out
