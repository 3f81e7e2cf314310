from __future__ import annotations

import json
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from f2sketch.boolfn import builtin, maj_fn, parity_fn
from f2sketch.errors import ValidationError
from f2sketch.fourierdim import max_subspace_weight
from f2sketch.gf2 import Subspace
from f2sketch.sketch import (
    LtfSpec,
    clopper_pearson,
    deterministic_sketch,
    eval_sketch_error,
    ltf_margin,
    ltf_preprocess,
    ltf_sketch,
    pack_decoder,
    paired_monte_carlo,
    random_parity_sketch,
    random_parity_width,
    scheme_from_json,
    sign_trick_sketch,
    unpack_decoder,
)

F = Fraction


def full_eval(inst, f):
    xs = np.arange(1 << f.n, dtype=np.uint64)
    return inst.evaluate_many(xs)


def test_deterministic_parity():
    s = deterministic_sketch(parity_fn(4))
    assert s.k == 1
    assert list(s.sample().table) == [1, -1]


def test_deterministic_maj3_zero_error():
    f = maj_fn(3)
    s = deterministic_sketch(f)
    assert s.k == 3
    assert np.array_equal(full_eval(s.sample(), f), f.table)
    assert eval_sketch_error(s, f) == {"per_x_max": 0, "uniform_avg": 0, "instances": 1}


def test_deterministic_addr_no_compression():
    assert deterministic_sketch(builtin("addr:4")).k == 6


def test_sign_trick_full_span_is_exact():
    f = builtin("random:5:1/3:2")
    s, err = sign_trick_sketch(f, Subspace.full(5))
    assert err == 0


def test_sign_trick_maj3():
    f = maj_fn(3)
    s, err = sign_trick_sketch(f, Subspace.span([1, 2], 3))
    assert err == F(1, 4)
    assert eval_sketch_error(s, f)["uniform_avg"] == err


def test_sign_trick_recmaj_within_upper_bound():
    f = builtin("maj3k:2")
    w3, A = max_subspace_weight(f, 3)
    s, err = sign_trick_sketch(f, A)
    direct = F(int(np.count_nonzero(full_eval(s.sample(), f) != f.table)), 1 << f.n)
    assert direct == err <= (1 - w3) / 2


def test_random_parity_width():
    assert random_parity_width(0, F(1, 10)) == 0
    assert random_parity_width(9, F(1, 8)) == 8  # 2^8 >= 144 > 2^7
    assert random_parity_width(1, F(1, 4)) == 3


def test_random_parity_constant():
    f = builtin("const:4")
    s = random_parity_sketch(f, F(1, 4))
    assert s.k == 0 and eval_sketch_error(s, f)["per_x_max"] == 0


def test_random_parity_singleton_exact():
    # AND on 4 bits: the minority side is one point; each other x collides with it w.p. 2^-k
    f = builtin("and:4")
    s = random_parity_sketch(f, F(1, 4))
    res = eval_sketch_error(s, f, "exact")
    assert s.k == 3
    assert res["per_x_max"] == F(1, 8)
    assert res["uniform_avg"] == F(15, 128)


def test_random_parity_hamge_monte_carlo():
    f = builtin("hamge:8:7")
    s = random_parity_sketch(f, F(1, 8), seed=1)
    assert s.k == 8
    res = eval_sketch_error(s, f, "monte", trials=2000, seed=3)
    assert res["per_x_max_ci"][0] <= 1 / 8


def test_ml_decoder_option():
    f = builtin("hamge:6:5")
    s = random_parity_sketch(f, F(1, 4), decoder="ml")
    inst = s.sample(0)
    assert set(np.unique(inst.table)) <= {-1, 1}
    with pytest.raises(ValidationError):
        random_parity_sketch(f, F(1, 4), decoder="vote")


def test_sampling_is_seeded():
    f = builtin("hamge:8:7")
    a = random_parity_sketch(f, F(1, 8), seed=5)
    b = random_parity_sketch(f, F(1, 8), seed=5)
    c = random_parity_sketch(f, F(1, 8), seed=6)
    assert a.sample(3).rows == b.sample(3).rows
    assert a.sample(3).rows != c.sample(3).rows


def test_decoder_packing_round_trip():
    t = np.array([1, -1, -1, 1, 1, 1, -1, 1], dtype=np.int8)
    h = pack_decoder(t)
    assert h == "46"
    assert np.array_equal(unpack_decoder(h, 3), t)


def test_scheme_json_round_trip():
    f = maj_fn(3)
    s = deterministic_sketch(f)
    obj = json.loads(json.dumps(s.to_json()))
    back = scheme_from_json(obj)
    assert back.sample().rows == s.sample().rows
    assert np.array_equal(back.sample().table, s.sample().table)
    r = random_parity_sketch(builtin("hamge:8:7"), F(1, 8), seed=4)
    back = scheme_from_json(json.loads(json.dumps(r.to_json())))
    assert back.sample(2).rows == r.sample(2).rows


def test_scheme_json_rejects_mismatch():
    obj = deterministic_sketch(maj_fn(3)).to_json()
    obj["k"] = 2
    with pytest.raises(ValidationError):
        scheme_from_json(obj)


def test_ltf_margin_subset_sum_oracle():
    w = [F(1, 2), F(3, 10), F(3, 20), F(1, 20)]
    theta = F(2, 5)
    oracle = min(abs(sum(a * b for a, b in zip(w, x)) - theta) for x in product([0, 1], repeat=4))
    assert oracle == F(1, 20) == ltf_margin(w, theta)


def test_ltf_preprocess_drops_small_weights():
    w = [F(1, 2), F(3, 10), F(3, 20), F(1, 20)]
    spec = LtfSpec(w, F(2, 5))
    pre = ltf_preprocess(spec)
    assert pre.weights == [F(10, 19), F(6, 19), F(3, 19)]
    assert pre.theta == F(8, 19) and pre.margin == F(1, 19)
    # the pruned LTF agrees with the original on all 16 inputs (dropped coordinate ignored)
    orig = spec.to_boolfun().table
    kept = pre.to_boolfun().table
    assert all(orig[x] == kept[x & 7] for x in range(16))


def test_ltf_preprocess_keeps_uniform_weights():
    pre = ltf_preprocess(LtfSpec.hamge(8, 3))
    assert len(pre.weights) == 8 and pre.margin == F(1, 16)
    assert pre.to_boolfun() == builtin("hamge:8:3")


def test_ltf_sketch_hamge64():
    spec = ltf_preprocess(LtfSpec.hamge(64, 4))
    assert spec.ratio() == 7
    s = ltf_sketch(spec, F(1, 10), seed=0)
    assert s.params["direct"] and s.k == 20 and s.params["below_threshold"] == 43745
    inst = s.sample(0)
    assert inst.evaluate_many(np.array([0], dtype=np.uint64))[0] == 1
    assert inst.evaluate_many(np.array([(1 << 64) - 1], dtype=np.uint64))[0] == -1


def test_ltf_sketch_exact_small():
    spec = ltf_preprocess(LtfSpec.hamge(10, 3))
    s = ltf_sketch(spec, F(1, 10), seed=2)
    f = builtin("hamge:10:3")
    res = eval_sketch_error(s, f, "monte", trials=300, seed=1)
    # inputs above threshold are never misclassified; below it the error stays small
    assert res["per_x_max_ci"][0] <= 0.1


def test_paired_monte_carlo_counts():
    f = builtin("and:4")
    s = random_parity_sketch(f, F(1, 4))
    res = paired_monte_carlo(s, lambda xs: f.table[xs.astype(np.int64)], lambda rng: int(rng.integers(0, 15)), 400, seed=0)
    assert res["trials"] == 400 and 0 < res["errors"] < 120


def test_clopper_pearson_closed_form():
    lo, hi = clopper_pearson(0, 10)
    assert lo == 0 and abs(hi - (1 - 0.025**0.1)) < 1e-12
    lo, hi = clopper_pearson(10, 10)
    assert hi == 1 and abs(lo - 0.025**0.1) < 1e-12
