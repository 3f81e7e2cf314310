# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_fallback.py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil


def fwht(a):
    cdef cnp.ndarray[int64_t, ndim=1] out = np.array(a, dtype=np.int64, copy=True)
    cdef int64_t[::1] v = out
    cdef Py_ssize_t size = v.shape[0], h = 1, i, j
    cdef int64_t x, y
    with nogil:
        while h < size:
            i = 0
            while i < size:
                for j in range(i, i + h):
                    x = v[j]
                    y = v[j + h]
                    v[j] = x + y
                    v[j + h] = x - y
                i += 2 * h
            h <<= 1
    return out


def gf2_rank(rows):
    cdef cnp.ndarray[uint64_t, ndim=1] work = np.array([int(r) for r in rows], dtype=np.uint64)
    cdef uint64_t[::1] w = work
    cdef Py_ssize_t m = w.shape[0], r = 0, i, piv
    cdef uint64_t low, t
    cdef int bit
    if m == 0:
        return 0
    with nogil:
        for bit in range(64):
            low = (<uint64_t>1) << bit
            piv = -1
            for i in range(r, m):
                if w[i] & low:
                    piv = i
                    break
            if piv < 0:
                continue
            t = w[r]; w[r] = w[piv]; w[piv] = t
            for i in range(m):
                if i != r and (w[i] & low):
                    w[i] ^= w[r]
            r += 1
            if r == m:
                break
    return r


def span_sum(const int64_t[::1] W, basis):
    cdef Py_ssize_t d = len(basis), g
    cdef uint64_t rows[64]
    cdef uint64_t cur = 0
    cdef int64_t total = W[0]
    for g in range(d):
        rows[g] = <uint64_t>int(basis[g])
    for g in range(1, (<Py_ssize_t>1) << d):
        cur ^= rows[__builtin_ctzll(<unsigned long long>g)]
        total += W[cur]
    return total


def best_subspace(const int64_t[::1] W, int D, pivots):
    cdef cnp.ndarray[int64_t, ndim=2] P = np.ascontiguousarray(pivots, dtype=np.int64).reshape(
        len(pivots), -1)
    cdef Py_ssize_t m = P.shape[0], d = P.shape[1]
    cdef Py_ssize_t ci, i, t, F, g, l, nl, k, lowbits
    cdef int q, j
    cdef bint taken
    cdef uint64_t h, nhi, gray, a
    cdef int64_t best = -1
    cdef Py_ssize_t best_idx = -1
    cdef uint64_t best_a = 0
    cdef uint64_t hirows[64]
    cdef uint64_t low[8][64]
    cdef uint64_t cur[8]
    cdef int64_t s[8]
    cdef int slot_row[64 * 64]
    cdef uint64_t slot_mask[64 * 64]
    cdef Py_ssize_t nspan = (<Py_ssize_t>1) << d
    for ci in range(m):
        F = 0
        for i in range(d):
            hirows[i] = (<uint64_t>1) << P[ci, i]
            for q in range(P[ci, i] + 1, D):
                taken = False
                for j in range(d):
                    if P[ci, j] == q:
                        taken = True
                        break
                if not taken:
                    slot_row[F] = i
                    slot_mask[F] = (<uint64_t>1) << q
                    F += 1
        with nogil:
            # the low slots (up to 3) become 8 parallel lanes; the high slots
            # are walked in Gray-code order, one row update per step
            lowbits = F if F < 3 else 3
            nl = (<Py_ssize_t>1) << lowbits
            for l in range(nl):
                for i in range(d):
                    low[l][i] = 0
                for t in range(lowbits):
                    if (l >> t) & 1:
                        low[l][slot_row[t]] ^= slot_mask[t]
            nhi = (<uint64_t>1) << (F - lowbits)
            h = 0
            while h < nhi:
                if h:
                    t = lowbits + __builtin_ctzll(<unsigned long long>h)
                    hirows[slot_row[t]] ^= slot_mask[t]
                gray = h ^ (h >> 1)
                for l in range(nl):
                    cur[l] = 0
                    s[l] = W[0]
                for g in range(1, nspan):
                    k = __builtin_ctzll(<unsigned long long>g)
                    for l in range(nl):
                        cur[l] ^= hirows[k] ^ low[l][k]
                        s[l] += W[cur[l]]
                for l in range(nl):
                    a = (gray << lowbits) | <uint64_t>l
                    # canonical order: first pivot combo, then smallest assignment
                    if s[l] > best or (s[l] == best and ci == best_idx and a < best_a):
                        best = s[l]
                        best_idx = ci
                        best_a = a
                h += 1
    return int(best), int(best_idx), int(best_a)


def onebit_min(wplus, wminus):
    cdef cnp.ndarray[int64_t, ndim=2] WP = np.ascontiguousarray(wplus, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=2] WM = np.ascontiguousarray(wminus, dtype=np.int64)
    cdef Py_ssize_t Y = WP.shape[0], X = WP.shape[1], y
    if X > 20:
        raise ValueError("one-bit search limited to 2^20 message functions")
    cdef int64_t *s1p = <int64_t *> malloc(Y * sizeof(int64_t))
    cdef int64_t *s1m = <int64_t *> malloc(Y * sizeof(int64_t))
    cdef int64_t *tp = <int64_t *> malloc(Y * sizeof(int64_t))
    cdef int64_t *tm = <int64_t *> malloc(Y * sizeof(int64_t))
    cdef uint64_t M, total = (<uint64_t>1) << X, gray, x
    cdef int64_t err, a, b, best = -1
    cdef uint64_t best_M = 0
    cdef int64_t[:, ::1] wp = WP
    cdef int64_t[:, ::1] wm = WM
    try:
        for y in range(Y):
            s1p[y] = 0
            s1m[y] = 0
            tp[y] = 0
            tm[y] = 0
            for x in range(<uint64_t>X):
                tp[y] += wp[y, x]
                tm[y] += wm[y, x]
        with nogil:
            # walk messages in Gray-code order, then report the smallest index
            # among minimisers by a second exact pass over ties
            for M in range(total):
                gray = M ^ (M >> 1)
                if M:
                    x = __builtin_ctzll(<unsigned long long>M)
                    if (gray >> x) & 1:
                        for y in range(Y):
                            s1p[y] += wp[y, x]
                            s1m[y] += wm[y, x]
                    else:
                        for y in range(Y):
                            s1p[y] -= wp[y, x]
                            s1m[y] -= wm[y, x]
                err = 0
                for y in range(Y):
                    a = s1p[y] if s1p[y] < s1m[y] else s1m[y]
                    b = (tp[y] - s1p[y]) if (tp[y] - s1p[y]) < (tm[y] - s1m[y]) else (tm[y] - s1m[y])
                    err += a + b
                if best < 0 or err < best or (err == best and gray < best_M):
                    best = err
                    best_M = gray
    finally:
        free(s1p)
        free(s1m)
        free(tp)
        free(tm)
    return int(best), int(best_M)
