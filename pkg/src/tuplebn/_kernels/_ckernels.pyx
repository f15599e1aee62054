# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled kernels for the sampling and counting inner loops.

Must stay output-identical to _pykernels: same inverse-CDF rule
("number of cumulative entries <= u, clamped to d-1"), same code layout
for tuple counting.
"""

import numpy as np

from libc.stdint cimport int64_t


def sample_node(const double[::1] u, int64_t[:, ::1] rows, Py_ssize_t jcol,
                const int64_t[::1] pcols, const int64_t[::1] pstrides,
                const double[:, ::1] cum):
    cdef Py_ssize_t i, t, c
    cdef Py_ssize_t l = u.shape[0]
    cdef Py_ssize_t np_ = pcols.shape[0]
    cdef Py_ssize_t d = cum.shape[1]
    cdef int64_t cfg
    for i in range(l):
        cfg = 0
        for t in range(np_):
            cfg += rows[i, pcols[t]] * pstrides[t]
        c = 0
        while c < d - 1 and u[i] >= cum[cfg, c]:
            c += 1
        rows[i, jcol] = c


def count_tuples(const int64_t[:, ::1] rows, const int64_t[::1] cols,
                 const int64_t[::1] strides, Py_ssize_t size):
    out = np.zeros(size, dtype=np.int64)
    cdef int64_t[::1] counts = out
    cdef Py_ssize_t i, t
    cdef Py_ssize_t l = rows.shape[0]
    cdef Py_ssize_t k = cols.shape[0]
    cdef int64_t code
    for i in range(l):
        code = 0
        for t in range(k):
            code += rows[i, cols[t]] * strides[t]
        counts[code] += 1
    return out
