# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: parallel-order Jacobi sweeps and fixed-order row scoring.

Mirrors ``_fallback`` function for function. Both backends perform the same
floating-point operations in the same order, so their outputs are
bit-identical (built with ``-ffp-contract=off`` so no FMA contraction).
"""
import numpy as np
cimport numpy as cnp

from prunerank._fallback import round_robin
from libc.math cimport sqrt

cnp.import_array()

ctypedef fused real:
    float
    double


cdef double _off_norm(double[:, ::1] a, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t p, q
    cdef double s = 0.0
    for p in range(d - 1):
        for q in range(p + 1, d):
            s += a[p, q] * a[p, q]
    return sqrt(2.0 * s)


cdef void _mirror_upper(double[:, ::1] a, Py_ssize_t d) noexcept nogil:
    # tiled so the transposed writes stay in cache
    cdef Py_ssize_t bi = 0, bj, k, l, kend, lend
    while bi < d:
        kend = min(bi + 32, d)
        bj = bi
        while bj < d:
            lend = min(bj + 32, d)
            for l in range(bj, lend):
                for k in range(bi, min(kend, l)):
                    a[l, k] = a[k, l]
            bj += 32
        bi += 32


def jacobi_eigh(double[:, ::1] s, double tol, int max_sweeps):
    """Parallel-order cyclic Jacobi on a symmetric matrix.

    Each round applies rotations to a set of disjoint index pairs; a sweep
    visits every off-diagonal pair once. Returns
    ``(diagonal, vectors, sweeps, off_norm)`` with eigenpairs unsorted;
    converged means ``off_norm <= tol * ||s||_F``.
    """
    cdef Py_ssize_t d = s.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a_arr = np.array(s, dtype=np.float64, order="C")
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vt_arr = np.eye(d, dtype=np.float64)
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] vt = vt_arr
    cdef Py_ssize_t[:, ::1] pairs
    cdef Py_ssize_t npairs, i, k, l, p, q
    cdef double apq, app, aqq, tau, t, c, sn, x, y
    cdef double fro = 0.0
    cdef double off
    cdef int sweep = 0
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rot_arr = np.empty((d // 2 + 1, 6), dtype=np.float64)
    cdef double[:, ::1] rot = rot_arr

    for k in range(d):
        for l in range(d):
            fro += a[k, l] * a[k, l]
    fro = sqrt(fro)
    schedule = round_robin(d)

    off = _off_norm(a, d)
    while off > tol * fro and sweep < max_sweeps:
        for round_pairs in schedule:
            pairs = round_pairs
            npairs = pairs.shape[0]
            with nogil:
                # rot[i] = (c, s, t, a_pq, a_pp, a_qq) from the pre-round matrix
                for i in range(npairs):
                    p = pairs[i, 0]
                    q = pairs[i, 1]
                    apq = a[p, q]
                    app = a[p, p]
                    aqq = a[q, q]
                    if apq == 0.0:
                        c = 1.0
                        sn = 0.0
                        t = 0.0
                    else:
                        tau = (aqq - app) / (2.0 * apq)
                        if tau >= 0.0:
                            t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                        else:
                            t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                        c = 1.0 / sqrt(1.0 + t * t)
                        sn = t * c
                    rot[i, 0] = c
                    rot[i, 1] = sn
                    rot[i, 2] = t
                    rot[i, 3] = apq
                    rot[i, 4] = app
                    rot[i, 5] = aqq
                # left multiply by J^T: mixes rows p and q
                for i in range(npairs):
                    p = pairs[i, 0]
                    q = pairs[i, 1]
                    c = rot[i, 0]
                    sn = rot[i, 1]
                    for k in range(d):
                        x = a[p, k]
                        y = a[q, k]
                        a[p, k] = c * x - sn * y
                        a[q, k] = sn * x + c * y
                    for k in range(d):
                        x = vt[p, k]
                        y = vt[q, k]
                        vt[p, k] = c * x - sn * y
                        vt[q, k] = sn * x + c * y
                # right multiply by J: mixes columns p and q, row by row
                for k in range(d):
                    for i in range(npairs):
                        p = pairs[i, 0]
                        q = pairs[i, 1]
                        c = rot[i, 0]
                        sn = rot[i, 1]
                        x = a[k, p]
                        y = a[k, q]
                        a[k, p] = c * x - sn * y
                        a[k, q] = sn * x + c * y
                for i in range(npairs):
                    p = pairs[i, 0]
                    q = pairs[i, 1]
                    t = rot[i, 2]
                    apq = rot[i, 3]
                    a[p, p] = rot[i, 4] - t * apq
                    a[q, q] = rot[i, 5] + t * apq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                # restore exact symmetry from the upper triangle
                _mirror_upper(a, d)
        sweep += 1
        off = _off_norm(a, d)

    return np.diagonal(a_arr).copy(), np.ascontiguousarray(vt_arr.T), sweep, off


cdef inline double _dot4(const real[:, ::1] m, Py_ssize_t i, const double[::1] q,
                         Py_ssize_t d) noexcept nogil:
    cdef double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0
    cdef Py_ssize_t j = 0
    cdef Py_ssize_t stop = d - d % 4
    while j < stop:
        l0 += <double>m[i, j] * q[j]
        l1 += <double>m[i, j + 1] * q[j + 1]
        l2 += <double>m[i, j + 2] * q[j + 2]
        l3 += <double>m[i, j + 3] * q[j + 3]
        j += 4
    if j < d:
        l0 += <double>m[i, j] * q[j]
    if j + 1 < d:
        l1 += <double>m[i, j + 1] * q[j + 1]
    if j + 2 < d:
        l2 += <double>m[i, j + 2] * q[j + 2]
    return (l0 + l1) + (l2 + l3)


def score_rows(const real[:, ::1] matrix, const double[::1] q):
    """Dot product of every row with ``q``, accumulated in float64."""
    cdef Py_ssize_t n = matrix.shape[0]
    cdef Py_ssize_t d = matrix.shape[1]
    cdef Py_ssize_t i
    if q.shape[0] != d:
        raise ValueError(f"query length {q.shape[0]} does not match index dim {d}")
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            out[i] = _dot4(matrix, i, q, d)
    return out_arr
