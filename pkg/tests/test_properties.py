from __future__ import annotations

from fractions import Fraction

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from f2sketch.boolfn import BoolFun, compose, convolve, inverse_wht, shift, wht
from f2sketch.fourierdim import exact_dim
from f2sketch.gf2 import (
    Gf2Matrix,
    Subspace,
    enumerate_subspaces,
    gaussian_binomial,
    odd_set,
    rank,
    rref_rank,
    set_dominates,
    standard_domination_decompose,
    super_slam,
)
from f2sketch.sketch import SketchInstance
from f2sketch.streamsim import automaton_from_sketch, check_path_independence


@st.composite
def boolfuns(draw, nmin=0, nmax=7):
    n = draw(st.integers(nmin, nmax))
    bits = draw(st.lists(st.booleans(), min_size=1 << n, max_size=1 << n))
    return BoolFun.from_bits(n, [int(b) for b in bits])


@st.composite
def matrices(draw, nmax=8, rmax=6):
    n = draw(st.integers(1, nmax))
    rows = draw(st.lists(st.integers(0, (1 << n) - 1), min_size=1, max_size=rmax))
    return Gf2Matrix(n, tuple(rows))


def _pc(v):
    return bin(v).count("1")


@given(boolfuns())
def test_parseval(f):
    assert wht(f).sum_squares() == 4**f.n


@given(boolfuns())
def test_transform_round_trip(f):
    assert inverse_wht(wht(f)) == f


@given(boolfuns(nmin=1), st.data())
def test_shift_multiplies_by_character(f, data):
    z = data.draw(st.integers(0, (1 << f.n) - 1))
    s, t = wht(f), wht(shift(f, z))
    for a in range(1 << f.n):
        assert t[a] == s[a] * (-1) ** _pc(a & z)


@given(boolfuns(nmax=6), st.data())
def test_convolution_multiplies_coefficients(f, data):
    bits = data.draw(st.lists(st.booleans(), min_size=1 << f.n, max_size=1 << f.n))
    g = BoolFun.from_bits(f.n, [int(b) for b in bits])
    h = convolve(f, g)
    sf, sg = wht(f), wht(g)
    for a in range(1 << f.n):
        assert h.coefficient(a) == sf.coefficient(a) * sg.coefficient(a)


@given(matrices())
def test_rref_idempotent_and_rank_preserving(M):
    R, r = rref_rank(M)
    assert rref_rank(R) == (R, r)
    assert r == rank(M.rows)
    assert Subspace.span(R.rows, M.n) == Subspace.span(M.rows, M.n)


@given(st.integers(0, 5), st.data())
def test_enumeration_count(n, data):
    d = data.draw(st.integers(0, n))
    subs = list(enumerate_subspaces(n, d))
    assert len(subs) == gaussian_binomial(n, d) == len(set(subs))


@given(st.integers(1, 10), st.data())
def test_domination(n, data):
    d = data.draw(st.integers(1, min(5, n)))
    vecs = data.draw(st.lists(st.integers(1, (1 << n) - 1), min_size=d, max_size=d))
    L = Subspace.span(vecs, n)
    if L.dim == 0:
        return
    S1, S2, S3, matching = standard_domination_decompose(L)
    assert S1.dim <= L.dim - 1 and S2.dim <= L.dim and S3.dim <= 2 * L.dim
    ok, _ = set_dominates(sorted(odd_set(S1) | odd_set(S2) | odd_set(S3)), sorted(odd_set(L)))
    assert ok
    assert len({img for _, img in matching}) == len(matching) == len(odd_set(L))


@given(matrices(nmax=3, rmax=3), matrices(nmax=3, rmax=3))
def test_super_slam_rank(A, B):
    assert rank(super_slam(A, B).rows) >= rank(A.rows) * rank(B.rows)


@given(boolfuns(nmin=1, nmax=3), st.data())
def test_composition_dimension_law(f, data):
    m = data.draw(st.integers(1, 3))
    # balanced g: a random permutation of half +1 / half -1
    perm = data.draw(st.permutations(range(1 << m)))
    g = BoolFun(m, [1 if perm[i] < (1 << (m - 1)) else -1 for i in range(1 << m)])
    if f.n * m > 9:
        return
    assert exact_dim(compose(f, g))[0] >= exact_dim(f)[0] * exact_dim(g)[0]


@given(st.integers(1, 6), st.data())
def test_sketch_is_linear_and_automaton_path_independent(n, data):
    k = data.draw(st.integers(1, 4))
    rows = data.draw(st.lists(st.integers(0, (1 << n) - 1), min_size=k, max_size=k))
    inst = SketchInstance(n, rows, np.ones(1 << k, dtype=np.int8))
    x = data.draw(st.integers(0, (1 << n) - 1))
    y = data.draw(st.integers(0, (1 << n) - 1))
    assert inst.sketch(x ^ y) == inst.sketch(x) ^ inst.sketch(y)
    assert check_path_independence(automaton_from_sketch(inst)) is None


@given(boolfuns(nmax=5))
def test_weights_are_exact_dyadic(f):
    s = wht(f)
    total = sum(s.weight(a) for a in range(1 << f.n))
    assert total == Fraction(1)
