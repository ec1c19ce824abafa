# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled d-dimensional window-sum kernel.

Evaluates signed corner sums of a zero-padded prefix table for a full
cartesian product of per-axis window index ranges.  This is the inner loop
of every seminorm and Steklov-field evaluation, so it is worth keeping off
the NumPy temporary-allocation path for large 3-d grids.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF MAXDIM = 6


def box_window_sums(cnp.ndarray prefix, i0s, i1s):
    """Same contract as chargelab._winpure.box_window_sums."""
    cdef int d = prefix.ndim
    if d > MAXDIM:
        raise ValueError("kernel supports at most 6 dimensions")

    cdef cnp.ndarray[cnp.float64_t, ndim=1] P = \
        np.ascontiguousarray(prefix, dtype=np.float64).reshape(-1)

    cdef long long strides[MAXDIM]
    cdef long long sizes[MAXDIM]
    cdef int k
    cdef long long s = 1
    for k in range(d - 1, -1, -1):
        strides[k] = s
        s *= prefix.shape[k]

    # per-axis window offsets, pre-multiplied by the flat stride
    offs = []
    cdef long long total = 1
    for k in range(d):
        a = np.asarray(i0s[k], dtype=np.int64) * strides[k]
        b = np.asarray(i1s[k], dtype=np.int64) * strides[k]
        if a.shape[0] != b.shape[0]:
            raise ValueError("i0/i1 length mismatch")
        offs.append(np.ascontiguousarray(a))
        offs.append(np.ascontiguousarray(b))
        sizes[k] = a.shape[0]
        total *= a.shape[0]

    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(total, dtype=np.float64)

    cdef const long long* p0[MAXDIM]
    cdef const long long* p1[MAXDIM]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] tmp
    for k in range(d):
        tmp = offs[2 * k]
        p0[k] = <const long long*> tmp.data
        tmp = offs[2 * k + 1]
        p1[k] = <const long long*> tmp.data

    cdef int ncorners = 1 << d
    cdef double sgn[64]
    cdef int c, bits, nbits
    for c in range(ncorners):
        nbits = 0
        bits = c
        while bits:
            nbits += bits & 1
            bits >>= 1
        sgn[c] = -1.0 if (d - nbits) % 2 else 1.0

    cdef long long idx[MAXDIM]
    cdef long long cur[MAXDIM][2]
    for k in range(d):
        idx[k] = 0

    cdef long long t, flat
    cdef double acc
    for t in range(total):
        for k in range(d):
            cur[k][0] = p0[k][idx[k]]
            cur[k][1] = p1[k][idx[k]]
        acc = 0.0
        for c in range(ncorners):
            flat = 0
            for k in range(d):
                flat += cur[k][(c >> k) & 1]
            acc += sgn[c] * P[flat]
        out[t] = acc
        # odometer increment, last axis fastest
        for k in range(d - 1, -1, -1):
            idx[k] += 1
            if idx[k] < sizes[k]:
                break
            idx[k] = 0

    return out.reshape(tuple(int(sizes[k]) for k in range(d)))
