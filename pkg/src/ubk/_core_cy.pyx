# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops for 1-d kernel-weight sums.

Same API and semantics as ubk._core_numpy; see that module for the
kernel kind codes and conventions (sorted covariates, closed support).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

BOX = 0
TRIANGULAR = 1
EPANECHNIKOV = 2
QUARTIC = 3


cdef inline double _profile(int kind, double u) nogil:
    cdef double q
    if fabs(u) > 0.5:
        return 0.0
    if kind == 0:
        return 1.0
    if kind == 1:
        return 2.0 * (1.0 - 2.0 * fabs(u))
    if kind == 2:
        return 1.5 * (1.0 - 4.0 * u * u)
    q = 1.0 - 4.0 * u * u
    return 1.875 * q * q


cdef inline Py_ssize_t _lower(const double[::1] x, double v) nogil:
    # first index with x[i] >= v
    cdef Py_ssize_t lo = 0, hi = x.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if x[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t _upper(const double[::1] x, double v) nogil:
    # first index with x[i] > v
    cdef Py_ssize_t lo = 0, hi = x.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if x[mid] <= v:
            lo = mid + 1
        else:
            hi = mid
    return lo


def profile(kind, u):
    u_arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
    out = np.empty_like(u_arr)
    cdef double[::1] uv = np.ascontiguousarray(u_arr)
    cdef double[::1] ov = out
    cdef int k = kind
    cdef Py_ssize_t i
    for i in range(uv.shape[0]):
        ov[i] = _profile(k, uv[i])
    return out if np.ndim(u) else float(out[0])


def density_sums(kind, x_sorted, grid, double scale):
    cdef const double[::1] x = np.ascontiguousarray(x_sorted, dtype=np.float64)
    cdef const double[::1] g = np.ascontiguousarray(grid, dtype=np.float64)
    out = np.empty(g.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef int k = kind
    cdef Py_ssize_t j, i, lo, hi
    cdef double acc, gj
    with nogil:
        for j in range(g.shape[0]):
            gj = g[j]
            lo = _lower(x, gj - 0.5 * scale)
            hi = _upper(x, gj + 0.5 * scale)
            acc = 0.0
            for i in range(lo, hi):
                acc += _profile(k, (gj - x[i]) / scale)
            o[j] = acc
    return out


def weighted_sums(kind, x_sorted, y_by_x, grid, double scale):
    cdef const double[::1] x = np.ascontiguousarray(x_sorted, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(y_by_x, dtype=np.float64)
    cdef const double[::1] g = np.ascontiguousarray(grid, dtype=np.float64)
    den = np.empty(g.shape[0], dtype=np.float64)
    num = np.empty(g.shape[0], dtype=np.float64)
    cdef double[::1] dv = den
    cdef double[::1] nv = num
    cdef int k = kind
    cdef Py_ssize_t j, i, lo, hi
    cdef double accd, accn, w, gj
    with nogil:
        for j in range(g.shape[0]):
            gj = g[j]
            lo = _lower(x, gj - 0.5 * scale)
            hi = _upper(x, gj + 0.5 * scale)
            accd = 0.0
            accn = 0.0
            for i in range(lo, hi):
                w = _profile(k, (gj - x[i]) / scale)
                accd += w
                accn += w * y[i]
            dv[j] = accd
            nv[j] = accn
    return den, num


def indicator_sums(kind, x_sorted, y_by_x, grid, double scale, t_grid):
    cdef const double[::1] x = np.ascontiguousarray(x_sorted, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(y_by_x, dtype=np.float64)
    cdef const double[::1] g = np.ascontiguousarray(grid, dtype=np.float64)
    cdef const double[::1] t = np.ascontiguousarray(t_grid, dtype=np.float64)
    den = np.empty(g.shape[0], dtype=np.float64)
    num = np.zeros((g.shape[0], t.shape[0]), dtype=np.float64)
    cdef double[::1] dv = den
    cdef double[:, ::1] nv = num
    cdef int k = kind
    cdef Py_ssize_t j, i, l, lo, hi
    cdef double accd, w, gj, yi
    with nogil:
        for j in range(g.shape[0]):
            gj = g[j]
            lo = _lower(x, gj - 0.5 * scale)
            hi = _upper(x, gj + 0.5 * scale)
            accd = 0.0
            for i in range(lo, hi):
                w = _profile(k, (gj - x[i]) / scale)
                accd += w
                yi = y[i]
                for l in range(t.shape[0]):
                    if yi <= t[l]:
                        nv[j, l] += w
            dv[j] = accd
    return den, num


def pair_sum(kind, x_sorted, double scale):
    cdef const double[::1] x = np.ascontiguousarray(x_sorted, dtype=np.float64)
    cdef int k = kind
    cdef Py_ssize_t j, i, lo, hi
    cdef double acc = 0.0, gj
    with nogil:
        for j in range(x.shape[0]):
            gj = x[j]
            lo = _lower(x, gj - 0.5 * scale)
            hi = _upper(x, gj + 0.5 * scale)
            for i in range(lo, hi):
                acc += _profile(k, (gj - x[i]) / scale)
    return acc
