# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tape interpreter for straight-line bit-vector programs (widths <= 64).

Samples are processed in blocks: each instruction is dispatched once per
block and then applied to every sample of the block in a tight loop.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t, int32_t
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "cython"

DEF BLOCK = 1024


cdef inline uint64_t wmask(int w) nogil:
    if w >= 64:
        return <uint64_t>0xFFFFFFFFFFFFFFFF
    return ((<uint64_t>1) << w) - 1


cdef inline int64_t as_signed(uint64_t v, int w) nogil:
    if w >= 64:
        return <int64_t>v
    if (v >> (w - 1)) & 1:
        return <int64_t>(v | ~wmask(w))
    return <int64_t>v


cdef void step(int k, int ww, uint64_t m, uint64_t pv, int64_t qv,
               uint64_t* d, uint64_t* x, uint64_t* y, uint64_t* z, Py_ssize_t L) nogil:
    cdef Py_ssize_t j
    cdef uint64_t t, sh, hi
    cdef int aw
    if k == 0:
        for j in range(L):
            d[j] = pv
    elif k == 2:
        for j in range(L):
            d[j] = (x[j] << qv) | y[j]
    elif k == 3:
        for j in range(L):
            d[j] = (x[j] >> pv) & m
    elif k == 4:
        for j in range(L):
            d[j] = x[j]
    elif k == 5:
        hi = m ^ wmask(<int>qv)
        for j in range(L):
            t = x[j]
            d[j] = t | (hi if (t >> (qv - 1)) & 1 else 0)
    elif k == 6:
        for j in range(L):
            d[j] = (~x[j]) & m
    elif k == 7:
        for j in range(L):
            d[j] = x[j] & y[j]
    elif k == 8:
        for j in range(L):
            d[j] = x[j] | y[j]
    elif k == 9:
        for j in range(L):
            d[j] = x[j] ^ y[j]
    elif k == 10:
        for j in range(L):
            d[j] = (0 - x[j]) & m
    elif k == 11:
        for j in range(L):
            d[j] = (x[j] + y[j]) & m
    elif k == 12:
        for j in range(L):
            d[j] = (x[j] - y[j]) & m
    elif k == 13:
        for j in range(L):
            d[j] = (x[j] * y[j]) & m
    elif k == 14:
        for j in range(L):
            d[j] = m if y[j] == 0 else x[j] / y[j]
    elif k == 15:
        for j in range(L):
            d[j] = x[j] if y[j] == 0 else x[j] % y[j]
    elif k == 16:
        for j in range(L):
            sh = y[j]
            d[j] = 0 if sh >= <uint64_t>ww else (x[j] << sh) & m
    elif k == 17:
        for j in range(L):
            sh = y[j]
            d[j] = 0 if sh >= <uint64_t>ww else x[j] >> sh
    elif k == 18:
        for j in range(L):
            sh = y[j]
            if sh >= <uint64_t>ww:
                sh = ww - 1
            d[j] = (<uint64_t>(as_signed(x[j], ww) >> sh)) & m
    elif k == 19:
        for j in range(L):
            d[j] = x[j] == y[j]
    elif k == 20:
        for j in range(L):
            d[j] = x[j] < y[j]
    elif k == 21:
        for j in range(L):
            d[j] = x[j] <= y[j]
    elif k == 22:
        aw = <int>qv
        for j in range(L):
            d[j] = as_signed(x[j], aw) < as_signed(y[j], aw)
    elif k == 23:
        aw = <int>qv
        for j in range(L):
            d[j] = as_signed(x[j], aw) <= as_signed(y[j], aw)
    elif k == 24:
        for j in range(L):
            d[j] = y[j] if x[j] else z[j]
    else:
        for j in range(L):
            d[j] = x[j] != 0


def run_tape(int32_t[::1] op, int32_t[::1] a, int32_t[::1] b, int32_t[::1] c,
             uint64_t[::1] p, int64_t[::1] q, int32_t[::1] w,
             uint64_t[:, ::1] inputs, int32_t[::1] out_idx, uint64_t[:, ::1] out):
    cdef Py_ssize_t n = op.shape[0]
    cdef Py_ssize_t nsamp = out.shape[1]
    cdef Py_ssize_t nout = out_idx.shape[0]
    cdef Py_ssize_t s0, L, i, j, k
    cdef uint64_t m
    cdef uint64_t* d
    cdef uint64_t* src
    cdef uint64_t* r = <uint64_t*> malloc(max(n, 1) * BLOCK * sizeof(uint64_t))
    if r == NULL:
        raise MemoryError()
    try:
        with nogil:
            s0 = 0
            while s0 < nsamp:
                L = min(BLOCK, nsamp - s0)
                for i in range(n):
                    m = wmask(w[i])
                    d = r + i * BLOCK
                    if op[i] == 1:
                        src = &inputs[p[i], s0]
                        for j in range(L):
                            d[j] = src[j] & m
                    else:
                        step(op[i], w[i], m, p[i], q[i], d,
                             r + (a[i] if a[i] >= 0 else 0) * BLOCK,
                             r + (b[i] if b[i] >= 0 else 0) * BLOCK,
                             r + (c[i] if c[i] >= 0 else 0) * BLOCK, L)
                for k in range(nout):
                    src = r + out_idx[k] * BLOCK
                    for j in range(L):
                        out[k, s0 + j] = src[j]
                s0 += L
    finally:
        free(r)
