# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef long _isqrt(long x):
    cdef long r = <long>sqrt(<double>x)
    while r * r > x:
        r -= 1
    while (r + 1) * (r + 1) <= x:
        r += 1
    return r


def mode_table(long p, long q, long N_max):
    cdef long n_hi, m_hi, n, m, N, count = 0, k = 0
    if N_max < p + q:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy(), empty.copy()
    n_hi = _isqrt((N_max - q) // p)
    m_hi = _isqrt((N_max - p) // q)
    for n in range(1, n_hi + 1):
        count += _isqrt((N_max - n * n * p) // q) if N_max - n * n * p >= q else 0
    cdef cnp.int64_t[:] Ns = np.empty(count, dtype=np.int64)
    cdef cnp.int64_t[:] ns = np.empty(count, dtype=np.int64)
    cdef cnp.int64_t[:] ms = np.empty(count, dtype=np.int64)
    for n in range(1, n_hi + 1):
        for m in range(1, m_hi + 1):
            N = n * n * p + m * m * q
            if N > N_max:
                break
            Ns[k] = N
            ns[k] = n
            ms[k] = m
            k += 1
    Na, na, ma = np.asarray(Ns), np.asarray(ns), np.asarray(ms)
    order = np.lexsort((na, Na))
    return Na[order], na[order], ma[order]


def assemble_stiffness(k11_u, k22_v, k12_c, double hu, double hv):
    cdef double[:, :] K11 = np.ascontiguousarray(k11_u, dtype=np.float64)
    cdef double[:, :] K22 = np.ascontiguousarray(k22_v, dtype=np.float64)
    cdef double[:, :] K12 = np.ascontiguousarray(k12_c, dtype=np.float64)
    cdef Py_ssize_t Nv = K22.shape[0] + 1
    cdef Py_ssize_t Nu = K11.shape[1] + 1
    cdef Py_ssize_t cap = 4 * Nv * (Nu - 1) + 4 * (Nv - 1) * Nu + 8 * (Nv - 1) * (Nu - 1)
    cdef cnp.int64_t[:] rows = np.empty(cap, dtype=np.int64)
    cdef cnp.int64_t[:] cols = np.empty(cap, dtype=np.int64)
    cdef double[:] vals = np.empty(cap, dtype=np.float64)
    cdef Py_ssize_t i, j, k = 0
    cdef long a, b, c, d
    cdef double w, h
    cdef long width = Nu - 2


    for j in range(Nv):
        for i in range(Nu - 1):
            w = K11[j, i] * (hv / hu)
            a = _node(i, j, Nu, Nv, width)
            b = _node(i + 1, j, Nu, Nv, width)
            k = _push(rows, cols, vals, k, a, a, w)
            k = _push(rows, cols, vals, k, b, b, w)
            k = _push(rows, cols, vals, k, a, b, -w)
            k = _push(rows, cols, vals, k, b, a, -w)
    for j in range(Nv - 1):
        for i in range(Nu):
            w = K22[j, i] * (hu / hv)
            a = _node(i, j, Nu, Nv, width)
            b = _node(i, j + 1, Nu, Nv, width)
            k = _push(rows, cols, vals, k, a, a, w)
            k = _push(rows, cols, vals, k, b, b, w)
            k = _push(rows, cols, vals, k, a, b, -w)
            k = _push(rows, cols, vals, k, b, a, -w)
    for j in range(Nv - 1):
        for i in range(Nu - 1):
            h = 0.5 * K12[j, i]
            a = _node(i, j, Nu, Nv, width)
            b = _node(i + 1, j, Nu, Nv, width)
            c = _node(i, j + 1, Nu, Nv, width)
            d = _node(i + 1, j + 1, Nu, Nv, width)
            k = _push(rows, cols, vals, k, a, a, h)
            k = _push(rows, cols, vals, k, d, d, h)
            k = _push(rows, cols, vals, k, a, d, -h)
            k = _push(rows, cols, vals, k, d, a, -h)
            k = _push(rows, cols, vals, k, b, b, -h)
            k = _push(rows, cols, vals, k, c, c, -h)
            k = _push(rows, cols, vals, k, b, c, h)
            k = _push(rows, cols, vals, k, c, b, h)
    return (np.asarray(rows[:k]).copy(), np.asarray(cols[:k]).copy(),
            np.asarray(vals[:k]).copy())


cdef inline long _node(Py_ssize_t i, Py_ssize_t j, Py_ssize_t Nu, Py_ssize_t Nv,
                       long width):
    if i <= 0 or j <= 0 or i >= Nu - 1 or j >= Nv - 1:
        return -1
    return (j - 1) * width + (i - 1)


cdef inline Py_ssize_t _push(cnp.int64_t[:] rows, cnp.int64_t[:] cols,
                             double[:] vals, Py_ssize_t k, long r, long c,
                             double v):
    if r < 0 or c < 0:
        return k
    rows[k] = r
    cols[k] = c
    vals[k] = v
    return k + 1
