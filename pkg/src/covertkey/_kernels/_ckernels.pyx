# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; same contracts as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log2

cnp.import_array()


def clog_table(Py_ssize_t n):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n + 1)
    cdef Py_ssize_t c
    for c in range(1, n + 1):
        out[c] = c * log2(<double>c)
    return out


def mi_matrix(xs, ys, int kx, int ky):
    cdef const cnp.int64_t[:, ::1] X = np.ascontiguousarray(xs, dtype=np.int64)
    cdef const cnp.int64_t[:, ::1] Y = np.ascontiguousarray(ys, dtype=np.int64)
    cdef Py_ssize_t a = X.shape[0], b = Y.shape[0], n = X.shape[1]
    if Y.shape[1] != n:
        raise ValueError("sequence lengths differ")
    cdef double[::1] table = clog_table(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((a, b))
    cdef double[:, ::1] out = out_arr
    cdef cnp.int64_t[::1] joint = np.zeros(kx * ky, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] cx = np.zeros((a, kx), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] cy = np.zeros((b, ky), dtype=np.int64)
    cdef double[::1] hx = np.zeros(a)
    cdef double[::1] hy = np.zeros(b)
    cdef Py_ssize_t i, j, t, u
    cdef double hxy, v
    for i in range(a):
        for t in range(n):
            cx[i, X[i, t]] += 1
        for u in range(kx):
            hx[i] += table[cx[i, u]]
    for j in range(b):
        for t in range(n):
            cy[j, Y[j, t]] += 1
        for u in range(ky):
            hy[j] += table[cy[j, u]]
    for i in range(a):
        for j in range(b):
            for u in range(kx * ky):
                joint[u] = 0
            for t in range(n):
                joint[X[i, t] * ky + Y[j, t]] += 1
            hxy = 0.0
            for u in range(kx * ky):
                hxy += table[joint[u]]
            v = (hxy - hx[i] - hy[j] + table[n]) / n
            out[i, j] = v if v > 0.0 else 0.0
    return out_arr


def mi_rows(x, ys, int kx, int ky):
    return mi_matrix(np.asarray(x, dtype=np.int64)[None, :], ys, kx, ky)[0]


def row_matches(y, entries):
    cdef const cnp.int64_t[::1] Yv = np.ascontiguousarray(y, dtype=np.int64)
    cdef const cnp.int64_t[:, ::1] E = np.ascontiguousarray(entries, dtype=np.int64)
    cdef Py_ssize_t r = E.shape[0], n = E.shape[1], i, t
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.ones(r, dtype=np.int64)
    for i in range(r):
        for t in range(n):
            if E[i, t] != Yv[t]:
                out[i] = 0
                break
    return out
