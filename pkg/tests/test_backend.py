"""The compiled kernels and the numpy fallback must agree bit for bit."""

from __future__ import annotations

import itertools
import os
import subprocess
import sys

import numpy as np
import pytest

from f2sketch import _fallback
from f2sketch._backend import BACKEND
from f2sketch.rng import derive_rng

try:
    from f2sketch import _kernels
except ImportError:  # pragma: no cover
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled extension not built")


@needs_ext
@pytest.mark.skipif(os.environ.get("F2SKETCH_PURE") == "1", reason="fallback forced")
def test_compiled_backend_selected():
    assert BACKEND == "cython"


def test_pure_env_forces_fallback():
    env = dict(os.environ, F2SKETCH_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "from f2sketch._backend import BACKEND; print(BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


@needs_ext
@pytest.mark.parametrize("n", [0, 1, 3, 8, 12])
def test_fwht(n):
    rng = derive_rng(0, "fwht", n)
    a = rng.integers(-5, 6, size=1 << n).astype(np.int64)
    assert np.array_equal(_kernels.fwht(a), _fallback.fwht(a))


@needs_ext
def test_gf2_rank():
    rng = derive_rng(0, "rank")
    for _ in range(200):
        rows = [int(v) for v in rng.integers(0, 1 << 20, size=int(rng.integers(0, 12)))]
        assert _kernels.gf2_rank(rows) == _fallback.gf2_rank(rows)


@needs_ext
def test_span_sum():
    rng = derive_rng(0, "span")
    W = rng.integers(0, 100, size=1 << 8).astype(np.int64)
    for _ in range(50):
        basis = [int(v) for v in rng.integers(1, 256, size=int(rng.integers(0, 5)))]
        assert _kernels.span_sum(W, basis) == _fallback.span_sum(W, basis)


@needs_ext
@pytest.mark.parametrize("D, d", [(3, 0), (4, 1), (5, 2), (6, 3), (6, 6), (8, 2), (8, 4)])
@pytest.mark.parametrize("top", [1, 2, 50])
def test_best_subspace(D, d, top):
    # small value ranges force ties, which must resolve to the same canonical subspace
    rng = derive_rng(0, "best", D, d, top)
    W = rng.integers(0, top, size=1 << D).astype(np.int64)
    combos = list(itertools.combinations(range(D), d))
    piv = np.zeros((len(combos), d), dtype=np.int64)
    for i, c in enumerate(combos):
        piv[i, :] = c
    assert tuple(_kernels.best_subspace(W, D, piv)) == tuple(_fallback.best_subspace(W, D, piv))


@needs_ext
@pytest.mark.parametrize("X", [2, 4, 8])
def test_onebit_min(X):
    rng = derive_rng(0, "onebit", X)
    wp = rng.integers(0, 5, size=(X, X)).astype(np.int64)
    wm = rng.integers(0, 5, size=(X, X)).astype(np.int64)
    assert tuple(_kernels.onebit_min(wp, wm)) == tuple(_fallback.onebit_min(wp, wm))
