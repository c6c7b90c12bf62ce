# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels.  Same contracts as ``_pykernels``."""

from itertools import permutations

import numpy as np
cimport numpy as cnp

from ._pykernels import eset_level_codes as _py_eset_level_codes

cnp.import_array()

ctypedef long long i64

cdef inline i64 _pair(i64 x, i64 y) nogil:
    cdef i64 s = x + y
    return s * (s + 1) // 2 + y


def _bound_ok(int k, masks):
    # largest possible code must fit comfortably in a signed 64-bit integer
    cdef object top = (1 << k) - 1
    cdef object code = top
    for _ in range(len(masks) - 1):
        code = (top + code) * (top + code + 1) // 2 + code
    code = (k + code) * (k + code + 1) // 2 + code
    return code < (1 << 62)


cdef Py_ssize_t _fill(int k, i64[:] ms, int n, i64[:] out, Py_ssize_t pos) nogil:
    cdef i64 subs[16]
    cdef int t
    cdef i64 code
    for t in range(n):
        subs[t] = ms[t]
    while True:
        code = subs[n - 1]
        t = n - 2
        while t >= 0:
            code = _pair(subs[t], code)
            t -= 1
        out[pos] = _pair(k, code)
        pos += 1
        # odometer over submasks, last component fastest
        t = n - 1
        while t >= 0:
            if subs[t] == 0:
                subs[t] = ms[t]
                t -= 1
            else:
                subs[t] = (subs[t] - 1) & ms[t]
                break
        if t < 0:
            return pos


def eset_level_codes(int k, masks):
    masks = tuple(int(m) for m in masks)
    cdef int n = len(masks)
    if n == 0 or n > 16 or k > 20 or not _bound_ok(k, masks):
        return _py_eset_level_codes(k, masks)
    arrangements = sorted(set(permutations(masks)))
    total = 0
    for arr in arrangements:
        size = 1
        for m in arr:
            size *= 1 << bin(m).count("1")
        total += size
    out = np.empty(total, dtype=np.int64)
    cdef i64[:] out_v = out
    cdef i64[:] ms_v
    cdef Py_ssize_t pos = 0
    for arr in arrangements:
        ms_v = np.asarray(arr, dtype=np.int64)
        pos = _fill(k, ms_v, n, out_v, pos)
    return np.unique(out[:pos]).tolist()
