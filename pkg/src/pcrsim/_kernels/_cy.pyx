# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend: the definitional per-element loops.

Bit-identical to the pure backend; exists because these folds are the hot
inner loops of exhaustive verification runs.
"""

import numpy as np

cimport numpy as cnp


cdef inline long long _clamp(long long v, long long kmax) nogil:
    if v > kmax:
        return kmax
    if v < -kmax:
        return -kmax
    return v


cdef inline long long _round_one(long long a, long long extra, long long kmax) nogil:
    cdef long long half, mag, q
    if extra == 0:
        return _clamp(a, kmax)
    half = (<long long>1) << (extra - 1)
    mag = a if a >= 0 else -a
    q = (mag + half - 1) >> extra
    if a < 0:
        q = -q
    return _clamp(q, kmax)


def round_shifted(a, long long extra, long long s):
    if extra < 0:
        raise ValueError("extra shift must be >= 0")
    cdef cnp.ndarray arr = np.ascontiguousarray(a, dtype=np.int64)
    cdef cnp.ndarray out = np.empty_like(arr)
    cdef long long[::1] src = arr.ravel()
    cdef long long[::1] dst = out.ravel()
    cdef long long kmax = ((<long long>1) << (2 * s)) - 1
    cdef Py_ssize_t i, n = src.shape[0]
    for i in range(n):
        dst[i] = _round_one(src[i], extra, kmax)
    return out


def fold_rows(x, long long s):
    cdef cnp.ndarray arr = np.ascontiguousarray(x, dtype=np.int64)
    if arr.ndim != 2:
        raise ValueError("fold_rows expects a 2-d array")
    cdef long long[:, ::1] v = arr
    cdef Py_ssize_t rows = v.shape[0], length = v.shape[1]
    cdef cnp.ndarray out = np.zeros(rows, dtype=np.int64)
    cdef long long[::1] o = out
    cdef long long kmax = ((<long long>1) << (2 * s)) - 1
    cdef long long acc
    cdef Py_ssize_t r, i
    for r in range(rows):
        acc = 0
        for i in range(length):
            acc = _clamp(acc + v[r, i], kmax)
        o[r] = acc
    return out


def dot_strict_rows(a, b, long long s):
    cdef cnp.ndarray aa = np.ascontiguousarray(a, dtype=np.int64)
    cdef cnp.ndarray bb = np.ascontiguousarray(b, dtype=np.int64)
    if aa.ndim != 2 or aa.shape[0] != bb.shape[0] or aa.shape[1] != bb.shape[1]:
        raise ValueError("dot_strict_rows expects equal 2-d shapes")
    cdef long long[:, ::1] av = aa
    cdef long long[:, ::1] bv = bb
    cdef Py_ssize_t rows = av.shape[0], length = av.shape[1]
    cdef cnp.ndarray out = np.zeros(rows, dtype=np.int64)
    cdef long long[::1] o = out
    cdef long long kmax = ((<long long>1) << (2 * s)) - 1
    cdef long long acc
    cdef Py_ssize_t r, i
    for r in range(rows):
        acc = 0
        for i in range(length):
            acc = _clamp(acc + _round_one(av[r, i] * bv[r, i], s, kmax), kmax)
        o[r] = acc
    return out


def segsum_strict(vals, starts, long long s):
    cdef cnp.ndarray vv = np.ascontiguousarray(vals, dtype=np.int64)
    cdef cnp.ndarray ss = np.ascontiguousarray(starts, dtype=np.int64)
    if vv.ndim != 2:
        raise ValueError("segsum_strict expects a 2-d value array")
    cdef long long[:, ::1] v = vv
    cdef long long[::1] st = ss
    cdef Py_ssize_t L = v.shape[0]
    cdef Py_ssize_t R = st.shape[0] - 1
    cdef cnp.ndarray out = np.zeros((L, R), dtype=np.int64)
    cdef long long[:, ::1] o = out
    cdef long long kmax = ((<long long>1) << (2 * s)) - 1
    cdef long long acc
    cdef Py_ssize_t r, seg, i
    for r in range(L):
        for seg in range(R):
            acc = 0
            for i in range(st[seg], st[seg + 1]):
                acc = _clamp(acc + v[r, i], kmax)
            o[r, seg] = acc
    return out
