"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel: best-of-N wall time for each backend and the
speedup.  Both backends get identical inputs and their results are checked
for equality before timing.
"""

from __future__ import annotations

import argparse
import itertools
import timeit

import numpy as np

from f2sketch import _fallback
from f2sketch.rng import derive_rng

try:
    from f2sketch import _kernels
except ImportError:  # pragma: no cover
    _kernels = None


def _pivots(D, d):
    combos = list(itertools.combinations(range(D), d))
    out = np.zeros((len(combos), d), dtype=np.int64)
    for i, c in enumerate(combos):
        out[i, :] = c
    return out


def cases():
    rng = derive_rng(0, "bench")
    a = rng.integers(-1, 2, size=1 << 20).astype(np.int64)
    yield "fwht n=20", lambda k: k.fwht(a)
    rows = [int(v) for v in rng.integers(0, 1 << 40, size=64)]
    yield "gf2_rank 64x40", lambda k: k.gf2_rank(rows)
    W = rng.integers(0, 1000, size=1 << 9).astype(np.int64)
    piv = _pivots(9, 4)
    yield "best_subspace D=9 d=4", lambda k: k.best_subspace(W, 9, piv)
    W2 = rng.integers(0, 1000, size=1 << 11).astype(np.int64)
    piv2 = _pivots(11, 3)
    yield "best_subspace D=11 d=3", lambda k: k.best_subspace(W2, 11, piv2)
    wp = rng.integers(0, 20, size=(16, 16)).astype(np.int64)
    wm = rng.integers(0, 20, size=(16, 16)).astype(np.int64)
    yield "onebit_min n=4", lambda k: k.onebit_min(wp, wm)


def same(x, y):
    if isinstance(x, np.ndarray):
        return np.array_equal(x, y)
    return tuple(np.atleast_1d(x)) == tuple(np.atleast_1d(y)) if not isinstance(x, tuple) else tuple(x) == tuple(y)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
        return 1
    print(f"{'kernel':<26}{'cython (s)':>12}{'numpy (s)':>12}{'speedup':>10}")
    for name, fn in cases():
        if not same(fn(_kernels), fn(_fallback)):
            raise SystemExit(f"{name}: backends disagree")
        tc = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat))
        tp = min(timeit.repeat(lambda: fn(_fallback), number=1, repeat=args.repeat))
        print(f"{name:<26}{tc:>12.4f}{tp:>12.4f}{tp / tc:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
