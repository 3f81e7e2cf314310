from __future__ import annotations

import json
from fractions import Fraction
from math import comb

import numpy as np
import pytest

from f2sketch.boolfn import builtin, maj_fn, parity_fn
from f2sketch.commsim import (
    OneWayProtocol,
    PairDistribution,
    best_one_bit_error,
    exact_error,
    message_bound_check,
    optimal_rectangle_error,
    protocol_from_json,
    protocol_from_sketch,
    disagreement_distribution,
    trivial_majority_error,
    trivial_majority_protocol,
)
from f2sketch.errors import ValidationError
from f2sketch.fourierdim import dim_profile
from f2sketch.gf2 import Subspace
from f2sketch.rng import derive_rng
from f2sketch.sketch import deterministic_sketch, sign_trick_sketch

F = Fraction
U3 = PairDistribution("uniform", 3)


def brute_error(p, f):
    """Direct double loop over (x, y) under the uniform distribution."""
    wrong = 0
    for y in range(1 << f.n):
        out = p.outputs(y)
        for x in range(1 << f.n):
            wrong += int(out[x]) != f(x ^ y)
    return F(wrong, 4**f.n)


def test_sketch_protocols_zero_error():
    for f in (parity_fn(4), maj_fn(3)):
        p = protocol_from_sketch(deterministic_sketch(f))
        assert exact_error(p, f, PairDistribution("uniform", f.n)) == 0
        assert brute_error(p, f) == 0
    assert protocol_from_sketch(deterministic_sketch(parity_fn(4))).c == 1


def test_sign_trick_protocol_maj3():
    f = maj_fn(3)
    s, _ = sign_trick_sketch(f, Subspace.span([1, 2], 3))
    p = protocol_from_sketch(s)
    assert exact_error(p, f, U3) == brute_error(p, f) <= F(1, 4)


@pytest.mark.parametrize("n, expected", [(3, F(1, 4)), (5, F(3, 16)), (7, F(5, 32))])
def test_trivial_majority_protocol(n, expected):
    p = trivial_majority_protocol(n)
    f = maj_fn(n)
    err = exact_error(p, f, PairDistribution("uniform", n))
    assert err == expected == trivial_majority_error(n)
    assert expected == F(comb(n - 1, (n - 1) // 2), 2**n)


def test_trivial_protocol_brute_force_n5():
    p = trivial_majority_protocol(5)
    assert brute_error(p, maj_fn(5)) == F(3, 16)


def test_optimal_rectangle_examples():
    f = maj_fn(3)
    assert optimal_rectangle_error(np.arange(8), f) == 0
    # Maj3(x + y) is balanced in x for every y, so a constant message errs half the time
    assert optimal_rectangle_error(np.zeros(8, dtype=np.int64), f) == F(1, 2)


def test_one_bit_character_uniform():
    f = builtin("chi:0110")
    err, _ = best_one_bit_error(f, PairDistribution("uniform", 4))
    assert err == 0


def test_one_bit_disagreement_distribution():
    f = builtin("chi:1000:0")
    mu = disagreement_distribution(f)
    assert mu.z == 0
    err, M = best_one_bit_error(f, mu)
    assert err == F(3, 16) > F(1, 200)
    msg = (M >> np.arange(16)) & 1
    assert optimal_rectangle_error(msg, f, mu) == err


def test_message_bound_disagreement():
    rep = message_bound_check(builtin("chi:1000:0"))
    assert rep["eps"] == F(1, 16)
    assert rep["holds"] and rep["worst_value"] == F(9, 16)


def test_disagreement_rejects_character():
    with pytest.raises(ValidationError):
        disagreement_distribution(builtin("chi:1000"))


def test_disagreement_weights_sum():
    mu = disagreement_distribution(builtin("chi:100:3"))
    assert int(mu.matrix().sum()) == mu.denominator


def test_protocol_json_round_trip():
    rng = derive_rng(1, "proto")
    msg = rng.integers(0, 4, size=16)
    dec = np.where(rng.random((16, 4)) < 0.5, 1, -1)
    p = OneWayProtocol(4, 2, msg, dec)
    q = protocol_from_json(json.loads(json.dumps(p.to_json())))
    assert np.array_equal(q.message, p.message) and np.array_equal(q.decoders, p.decoders)
    f = builtin("random:4:1/2:9")
    assert exact_error(q, f, PairDistribution("uniform", 4)) == brute_error(p, f)


def test_protocol_validation():
    with pytest.raises(ValidationError):
        OneWayProtocol(3, 1, np.arange(8))
    with pytest.raises(ValidationError):
        protocol_from_json({"n": 3})


@pytest.mark.parametrize("spec", ["maj:3", "and:4", "addr:2", "random:4:1/3:7"])
def test_gap_lower_bound_on_random_messages(spec):
    """Messages of c = d - 1 bits never beat Delta_d / 4 under the uniform distribution."""
    f = builtin(spec)
    prof = dim_profile(f)
    rng = derive_rng(0, "oneway_error_floor", spec)
    for d in range(1, f.n + 1):
        if d in prof.undefined:
            continue
        gap = prof.w[d] - prof.w[d - 1]
        c = d - 1
        for _ in range(1000):
            msg = rng.integers(0, 1 << c, size=1 << f.n) if c else np.zeros(1 << f.n, dtype=np.int64)
            assert optimal_rectangle_error(msg, f) >= gap / 4
