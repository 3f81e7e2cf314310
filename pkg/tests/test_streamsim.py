from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest

from f2sketch.boolfn import builtin, maj_fn
from f2sketch.errors import PathIndependenceError, ValidationError
from f2sketch.gf2 import Gf2Matrix, nullspace, rank
from f2sketch.rng import derive_rng, random_bits
from f2sketch.sketch import SketchInstance, deterministic_sketch, random_parity_sketch
from f2sketch.streamsim import (
    Automaton,
    Stream,
    automaton_from_json,
    automaton_from_sketch,
    check_path_independence,
    coset_check,
    coverage_report,
    default_model2_length,
    gen_stream,
    kernel,
    model1_errors,
    random_path_independence,
    read_automaton,
    read_stream,
    run,
    space_lb_report,
)


def test_stream_frequency_and_text():
    s = Stream(4, [1, 3, 1, 4])
    assert s.freq() == 0b1100
    assert read_stream(s.to_text()) == s
    with pytest.raises(ValidationError, match="line 3"):
        read_stream("n=4\n1\n9\n")
    with pytest.raises(ValidationError, match="line 1"):
        read_stream("4\n1\n")


def test_model2_empty_and_default_length():
    s, split = gen_stream(2, 6, seed=0, length=0)
    assert s.updates == [] and s.freq() == 0 and split == 0
    s, split = gen_stream(2, 10, seed=0)
    assert len(s.updates) == default_model2_length(10) == 93
    assert split == 46
    assert set(coverage_report(s, split)) == {"first_half_covers", "second_half_covers"}


def test_model1_halves_and_reproducibility():
    a, sa = gen_stream(1, 12, seed=7)
    b, sb = gen_stream(1, 12, seed=7)
    assert a == b and sa == sb
    first = a.updates[:sa]
    assert len(set(first)) == len(first)  # each index at most once per half


def test_deterministic_sketch_streams():
    f = builtin("random:6:1/2:3")
    scheme = deterministic_sketch(f)
    rng = derive_rng(0, "det-stream")
    for _ in range(50):
        s = Stream(6, (rng.integers(0, 6, size=int(rng.integers(0, 20))) + 1).tolist())
        assert run(scheme, s)["output"] == f(s.freq())
    assert run(scheme, Stream(6, []))["output"] == f(0)


def test_sketch_automaton_kernel_is_nullspace():
    rng = derive_rng(0, "kernels")
    for _ in range(20):
        k = int(rng.integers(1, 9))
        rows = [random_bits(rng, 8) for _ in range(k)]
        inst = SketchInstance(8, rows, np.ones(1 << k, dtype=np.int8))
        a = automaton_from_sketch(inst)
        assert check_path_independence(a) is None
        K = kernel(a)
        assert K == nullspace(Gf2Matrix(8, tuple(rows)))
        assert K.dim == 8 - rank(rows)
        assert coset_check(a) == (True, None)


def test_identity_kernel_is_zero():
    inst = SketchInstance(3, [1, 2, 4], np.ones(8, dtype=np.int8))
    assert kernel(automaton_from_sketch(inst)).dim == 0


def test_single_state_automaton():
    a = Automaton(4, [[0, 0, 0, 0]], [1])
    assert check_path_independence(a) is None
    assert kernel(a).dim == 4


def test_perturbed_transition_has_witness():
    inst = SketchInstance(3, [0b011, 0b110], np.array([1, -1, -1, 1], dtype=np.int8))
    a = automaton_from_sketch(inst)
    delta = a.delta.copy()
    delta[1, 2] = 0  # one wrong successor
    bad = Automaton(3, delta, a.output)
    w = check_path_independence(bad)
    assert w is not None
    s1, s2 = w
    assert Stream(3, s1).freq() == Stream(3, s2).freq()
    assert bad.run_updates(s1) != bad.run_updates(s2)
    with pytest.raises(PathIndependenceError):
        kernel(bad)
    assert coset_check(bad)[0] is False


def test_random_permutation_checker():
    last = Automaton(2, [[1, 2], [1, 2], [1, 2]], [1, 1, -1])  # remembers the last index
    w = random_path_independence(last, Stream(2, [1, 2, 1, 2]), trials=200)
    assert w is not None and last.run_updates(w[0]) != last.run_updates(w[1])
    # permutations cannot see that index 1 has order 3 here; the exact check can
    cyc = Automaton(2, [[1, 0], [2, 1], [0, 2]], [1, -1, 1])
    assert random_path_independence(cyc, Stream(2, [1, 2, 1, 2]), trials=200) is None
    assert check_path_independence(cyc) == ([1, 1], [])


def test_automaton_json_named_states():
    text = json.dumps({"n": 1, "states": ["even", "odd"], "initial": "even", "delta": [["odd"], ["even"]], "output": [1, -1]})
    a = read_automaton(text)
    assert a.run_updates([1, 1, 1]) == 1
    assert automaton_from_json(json.loads(json.dumps(a.to_json()))).run_updates([1]) == 1
    with pytest.raises(ValidationError):
        read_automaton("{bad")


def test_run_rejects_arity_mismatch():
    scheme = deterministic_sketch(maj_fn(3))
    with pytest.raises(ValidationError):
        run(scheme, Stream(4, [1]))


def test_space_lower_bounds():
    assert space_lb_report(builtin("parity:5"))["random_streams"]["bound_bits"] == 1
    assert space_lb_report(builtin("maj3k:2"))["random_streams"]["bound_bits"] == 5
    # w_d <= d/4 for addr:4 already forces d >= 2; the exact profile gives 4
    assert space_lb_report(builtin("addr:4"))["random_streams"]["bound_bits"] == 4


def test_model1_end_to_end_small():
    f = builtin("hamge:8:7")
    scheme = random_parity_sketch(f, Fraction(1, 8), seed=2)
    res = model1_errors(None, f, 500, seed=1, fresh=scheme)
    assert res["protocol_mismatches"] == 0
    assert res["rate"] <= 1 / 8 + 0.05
