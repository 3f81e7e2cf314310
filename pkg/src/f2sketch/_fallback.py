"""Pure numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_kernels.pyx``.
The two must agree exactly, including tie-breaking, so the enumeration order
below is part of the contract:

* pivot combinations are visited in the order given by the caller;
* within a pivot combination the free-entry assignment ``a`` runs upward from
  zero, bit ``t`` of ``a`` filling free slot ``t`` (row-major, ascending column);
* the first strictly larger value wins.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 1 << 16


def fwht(a):
    """Unnormalised Walsh-Hadamard transform of an int64 vector (returns a copy)."""
    out = np.array(a, dtype=np.int64, copy=True)
    size = out.shape[0]
    h = 1
    while h < size:
        view = out.reshape(-1, 2, h)
        lo = view[:, 0, :].copy()
        hi = view[:, 1, :]
        view[:, 0, :] = lo + hi
        view[:, 1, :] = lo - hi
        h <<= 1
    return out


def gf2_rank(rows):
    pivots = {}
    rank = 0
    for v in rows:
        v = int(v)
        while v:
            low = v & -v
            if low in pivots:
                v ^= pivots[low]
            else:
                pivots[low] = v
                rank += 1
                break
    return rank


def free_slots(D, piv):
    """Free (row, column) positions of an RREF matrix with pivot columns ``piv``."""
    pset = set(int(p) for p in piv)
    slots = []
    for i, p in enumerate(piv):
        for q in range(int(p) + 1, D):
            if q not in pset:
                slots.append((i, q))
    return slots


def span_sum(W, basis):
    cur = 0
    total = int(W[0])
    d = len(basis)
    rows = [int(b) for b in basis]
    for g in range(1, 1 << d):
        cur ^= rows[(g & -g).bit_length() - 1]
        total += int(W[cur])
    return total


def best_subspace(W, D, pivots):
    W = np.asarray(W, dtype=np.int64)
    pivots = np.asarray(pivots, dtype=np.int64)
    m = pivots.shape[0]
    d = pivots.shape[1] if pivots.ndim == 2 else 0
    best, best_idx, best_a = -1, -1, -1
    for ci in range(m):
        piv = [int(p) for p in pivots[ci]]
        slots = free_slots(D, piv)
        F = len(slots)
        total_a = 1 << F
        for start in range(0, total_a, _CHUNK):
            a = np.arange(start, min(total_a, start + _CHUNK), dtype=np.int64)
            rows = [np.full(a.shape, 1 << p, dtype=np.int64) for p in piv]
            for t, (i, q) in enumerate(slots):
                rows[i] |= ((a >> t) & 1) << q
            cur = np.zeros(a.shape, dtype=np.int64)
            acc = np.full(a.shape, W[0], dtype=np.int64)
            for g in range(1, 1 << d):
                cur ^= rows[(g & -g).bit_length() - 1]
                acc += W[cur]
            j = int(np.argmax(acc))
            if acc[j] > best:
                best, best_idx, best_a = int(acc[j]), ci, int(a[j])
    return best, best_idx, best_a


def onebit_min(wplus, wminus):
    """Minimum over all one-bit messages of the optimally decoded error.

    ``wplus[y, x]`` is the integer weight of the pair (x, y) when the target is
    +1, ``wminus`` likewise for -1.  Returns ``(numerator, message)`` with the
    smallest message index among minimisers.
    """
    wplus = np.asarray(wplus, dtype=np.int64)
    wminus = np.asarray(wminus, dtype=np.int64)
    X = wplus.shape[1]
    if X > 20:
        raise ValueError("one-bit search limited to 2^20 message functions")
    tot_p = wplus.sum(axis=1)
    tot_m = wminus.sum(axis=1)
    best, best_M = None, -1
    total = 1 << X
    for start in range(0, total, _CHUNK):
        Ms = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        bits = (Ms[:, None] >> np.arange(X, dtype=np.int64)[None, :]) & 1
        p1 = bits @ wplus.T
        m1 = bits @ wminus.T
        err = np.minimum(p1, m1) + np.minimum(tot_p - p1, tot_m - m1)
        err = err.sum(axis=1)
        j = int(np.argmin(err))
        if best is None or err[j] < best:
            best, best_M = int(err[j]), int(Ms[j])
    return best, best_M
