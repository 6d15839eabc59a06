# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def threshold_edges(const double[:, ::1] dist, double scale):
    cdef Py_ssize_t n = dist.shape[0]
    cdef Py_ssize_t i, j, m = 0
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] < scale:
                m += 1
    cdef cnp.int64_t[:, ::1] out = np.empty((m, 2), dtype=np.int64)
    m = 0
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] < scale:
                out[m, 0] = i
                out[m, 1] = j
                m += 1
    return np.asarray(out)


def triangles(Py_ssize_t n, const cnp.int64_t[:, ::1] edges):
    # CSR of upper neighbours; edges arrive sorted so each row is sorted.
    cdef Py_ssize_t m = edges.shape[0]
    cdef cnp.int64_t[::1] start = np.zeros(n + 1, dtype=np.int64)
    cdef Py_ssize_t e, i, j, a, b, pa, pb, ea, eb, t = 0
    for e in range(m):
        start[edges[e, 0] + 1] += 1
    for i in range(n):
        start[i + 1] += start[i]
    cdef cnp.int64_t[::1] nbr = np.empty(m, dtype=np.int64)
    for e in range(m):
        nbr[e] = edges[e, 1]
    out = []
    for e in range(m):
        i = edges[e, 0]
        j = edges[e, 1]
        pa = start[i]
        ea = start[i + 1]
        pb = start[j]
        eb = start[j + 1]
        while pa < ea and nbr[pa] <= j:
            pa += 1
        while pa < ea and pb < eb:
            a = nbr[pa]
            b = nbr[pb]
            if a == b:
                out.append((i, j, a))
                pa += 1
                pb += 1
            elif a < b:
                pa += 1
            else:
                pb += 1
    return np.array(out, dtype=np.int64).reshape(-1, 3)


def free_reduce(word):
    cdef Py_ssize_t n = len(word)
    cdef cnp.int64_t[::1] stack = np.empty(n if n > 0 else 1, dtype=np.int64)
    cdef Py_ssize_t top = 0
    cdef long x
    for item in word:
        x = item
        if top > 0 and stack[top - 1] == -x:
            top -= 1
        else:
            stack[top] = x
            top += 1
    return tuple([stack[i] for i in range(top)])


def cyclic_reduce(word):
    w = free_reduce(word)
    cdef Py_ssize_t lo = 0, hi = len(w)
    while hi - lo >= 2 and w[lo] == -w[hi - 1]:
        lo += 1
        hi -= 1
    return w[lo:hi]


def exponent_sums(word, Py_ssize_t ngens):
    cdef list row = [0] * ngens
    cdef long x
    for item in word:
        x = item
        if x > 0:
            row[x - 1] += 1
        else:
            row[-x - 1] -= 1
    return row
