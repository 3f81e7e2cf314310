"""Turnstile streams over F_2 and explicit stream automata.

A stream is a list of 1-based coordinate indices; its frequency vector is the
XOR of the corresponding unit vectors.  Automata are explicit tables with
integer states, ``delta[state, i - 1]`` the successor on index i.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .boolfn import BoolFun
from .errors import PathIndependenceError, ValidationError, check_cap
from .fourierdim import dim_profile, smallest_d_for_error
from .gf2 import Subspace
from .rng import derive_rng
from .sketch import SketchInstance, SketchScheme


@dataclass
class Stream:
    n: int
    updates: list

    def __post_init__(self):
        self.updates = [int(i) for i in self.updates]
        bad = [i for i in self.updates if not 1 <= i <= self.n]
        if bad:
            raise ValidationError(f"stream index {bad[0]} outside [1, {self.n}]")

    def freq(self, start=0, stop=None) -> int:
        v = 0
        for i in self.updates[start:stop]:
            v ^= 1 << (i - 1)
        return v

    def to_text(self) -> str:
        return f"n={self.n}\n" + "".join(f"{i}\n" for i in self.updates)


def read_stream(text: str) -> Stream:
    lines = text.splitlines()
    if not lines or not lines[0].strip().startswith("n="):
        raise ValidationError("expected 'n=<int>'", line=1)
    try:
        n = int(lines[0].strip()[2:])
    except ValueError:
        raise ValidationError("expected 'n=<int>'", line=1) from None
    ups = []
    for ln, raw in enumerate(lines[1:], start=2):
        s = raw.strip()
        if not s:
            continue
        try:
            i = int(s)
        except ValueError:
            raise ValidationError(f"bad index {s!r}", line=ln) from None
        if not 1 <= i <= n:
            raise ValidationError(f"index {i} outside [1, {n}]", line=ln)
        ups.append(i)
    return Stream(n, ups)


def default_model2_length(n: int) -> int:
    return max(1, math.ceil(4 * n * math.log(n))) if n > 1 else 1


def gen_stream(model: int, n: int, seed, length: int | None = None) -> tuple[Stream, int]:
    """Random stream and its Alice/Bob split point.

    Model 1: each half contains every index independently with probability
    1/2, in random order, so each half's frequency vector is uniform.
    Model 2: ``length`` uniform indices, split at length // 2.
    """
    rng = derive_rng(seed, "stream", model, n)
    if model == 1:
        halves = []
        for _ in range(2):
            keep = np.flatnonzero(rng.random(n) < 0.5) + 1
            halves.append(rng.permutation(keep).tolist())
        return Stream(n, halves[0] + halves[1]), len(halves[0])
    if model == 2:
        L = default_model2_length(n) if length is None else int(length)
        if L < 0:
            raise ValidationError("stream length must be nonnegative")
        ups = (rng.integers(0, n, size=L) + 1).tolist()
        return Stream(n, ups), L // 2
    raise ValidationError(f"unknown stream model {model}")


def coverage_report(s: Stream, split: int) -> dict:
    """Does each half touch every index?  A mixing self-check for model 2."""
    first = set(s.updates[:split])
    second = set(s.updates[split:])
    return {"first_half_covers": len(first) == s.n, "second_half_covers": len(second) == s.n}


class Automaton:
    """Deterministic stream automaton over indices 1..n with +-1 outputs per state."""

    def __init__(self, n, delta, output, initial=0, names=None):
        self.delta = np.asarray(delta, dtype=np.int64)
        self.output = np.asarray(output, dtype=np.int8)
        S = self.output.shape[0]
        if self.delta.shape != (S, n):
            raise ValidationError(f"delta must be {S} x {n}")
        if np.any((self.delta < 0) | (self.delta >= S)):
            raise ValidationError("delta points outside the state set")
        if not np.all((self.output == 1) | (self.output == -1)):
            raise ValidationError("outputs must be +1 or -1")
        if not 0 <= initial < S:
            raise ValidationError("initial state out of range")
        self.n = int(n)
        self.initial = int(initial)
        self.names = names

    @property
    def num_states(self):
        return self.output.shape[0]

    def step(self, state, i):
        return int(self.delta[state, i - 1])

    def run_updates(self, updates, state=None):
        c = self.initial if state is None else state
        for i in updates:
            c = int(self.delta[c, i - 1])
        return c

    def reachable(self) -> dict:
        """BFS from the initial state; maps each reachable state to a shortest index path."""
        paths = {self.initial: []}
        q = deque([self.initial])
        while q:
            c = q.popleft()
            for i in range(1, self.n + 1):
                d = int(self.delta[c, i - 1])
                if d not in paths:
                    paths[d] = paths[c] + [i]
                    q.append(d)
        return paths

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "states": self.names if self.names is not None else self.num_states,
            "initial": self.initial,
            "delta": self.delta.tolist(),
            "output": self.output.tolist(),
        }


def automaton_from_json(obj) -> Automaton:
    try:
        n = int(obj["n"])
        delta = obj["delta"]
        output = obj["output"]
        initial = obj.get("initial", 0)
    except (KeyError, TypeError, ValueError):
        raise ValidationError("automaton JSON needs n, delta, output") from None
    names = obj.get("states")
    if isinstance(names, list):
        if len(names) != len(output):
            raise ValidationError("states list and output table differ in length")
        if not isinstance(initial, int):
            initial = names.index(initial)
        index = {s: j for j, s in enumerate(names)}
        delta = [[index[t] if not isinstance(t, int) else t for t in row] for row in delta]
    else:
        names = None
    return Automaton(n, delta, output, initial, names)


def read_automaton(text: str) -> Automaton:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"bad JSON: {e.msg}", line=e.lineno) from None
    return automaton_from_json(obj)


def automaton_from_sketch(inst: SketchInstance) -> Automaton:
    """States are sketch values; index i XORs in column i; output is the decoder."""
    k = inst.k
    if k > 20:
        raise ValidationError("sketch automaton needs k <= 20")
    states = np.arange(1 << k, dtype=np.int64)
    delta = np.stack([states ^ int(c) for c in inst.cols], axis=1)
    output = inst.decode_many(states.astype(np.uint64))
    return Automaton(inst.n, delta, output, 0)


def run(algo, s: Stream, sample_seed: int = 0) -> dict:
    """Feed the stream to a sketch (scheme or instance) or an automaton."""
    if isinstance(algo, SketchScheme):
        algo = algo.sample(sample_seed)
    if algo.n != s.n:
        raise ValidationError(f"algorithm arity {algo.n} differs from stream arity {s.n}")
    if isinstance(algo, Automaton):
        c = algo.run_updates(s.updates)
        reach = len(algo.reachable())
        return {"output": int(algo.output[c]), "state": c, "space_bits": math.log2(reach)}
    cols = [int(c) for c in algo.cols]
    state = 0
    for i in s.updates:
        state ^= cols[i - 1]
    out = int(algo.decode_many(np.array([state], dtype=np.uint64))[0])
    return {"output": out, "state": state, "space_bits": algo.k}


# path independence -----------------------------------------------------------


def check_path_independence(a: Automaton):
    """Exact test on the reachable part.

    Path independence holds iff at every reachable state any two indices
    commute and every index is an involution; equal-frequency streams are
    connected by such local moves.  Returns None or a witness pair of streams
    with equal frequency vectors that end in different states.
    """
    paths = a.reachable()
    for c, path in sorted(paths.items(), key=lambda t: (len(t[1]), t[1])):
        for i in range(1, a.n + 1):
            ci = a.step(c, i)
            if a.step(ci, i) != c:
                return (path + [i, i], list(path))
            for j in range(i + 1, a.n + 1):
                if a.step(ci, j) != a.step(a.step(c, j), i):
                    return (path + [i, j], path + [j, i])
    return None


def random_path_independence(a: Automaton, s: Stream, trials=1000, seed=0):
    """Permute the stream ``trials`` times; returns a witness pair or None."""
    rng = derive_rng(seed, "perm")
    ref = a.run_updates(s.updates)
    for _ in range(trials):
        perm = [s.updates[j] for j in rng.permutation(len(s.updates))]
        if a.run_updates(perm) != ref:
            return (list(s.updates), perm)
    return None


def _require_path_independent(a):
    w = check_path_independence(a)
    if w is not None:
        raise PathIndependenceError(f"streams {w[0]} and {w[1]} have equal frequency but reach different states", w)


def state_map(a: Automaton) -> np.ndarray:
    """state(x) for every frequency vector x, by BFS over unit updates."""
    check_cap("arity", a.n, "arity n")
    if a.n > 20:
        raise ValidationError("state map needs n <= 20")
    st = np.full(1 << a.n, -1, dtype=np.int64)
    st[0] = a.initial
    q = deque([0])
    while q:
        x = q.popleft()
        for i in range(a.n):
            y = x ^ (1 << i)
            if st[y] < 0:
                st[y] = a.delta[st[x], i]
                q.append(y)
    return st


def kernel(a: Automaton) -> Subspace:
    """{x : x * o = 0 * o} for a path-independent automaton."""
    _require_path_independent(a)
    st = state_map(a)
    members = np.flatnonzero(st == a.initial)
    K = Subspace(a.n, tuple(int(v) for v in members))
    if (1 << K.dim) != len(members):  # pragma: no cover - excluded by path independence
        raise AssertionError("kernel is not closed under addition")
    return K


def coset_check(a: Automaton):
    """Does the state factor exactly through F_2^n / kernel?  Returns (ok, witness or None)."""
    try:
        K = kernel(a)
    except PathIndependenceError as e:
        return False, e.witness
    st = state_map(a)
    x = np.arange(1 << a.n, dtype=np.int64)
    for b in K.basis:
        bad = np.flatnonzero(st != st[x ^ b])
        if bad.size:
            return False, (int(bad[0]), int(bad[0]) ^ b)
    distinct = len(np.unique(st))
    if distinct != 1 << (a.n - K.dim):
        return False, ("state count", distinct, 1 << (a.n - K.dim))
    return True, None


# lower-bound report ----------------------------------------------------------


def space_lb_report(f: BoolFun, workers: int = 1) -> dict:
    prof = dim_profile(f, workers)
    d = smallest_d_for_error(prof, Fraction(1, 3))
    return {
        "fn": f.name,
        "n": f.n,
        "random_streams": {
            "bound_bits": d,
            "statement": "any algorithm correct w.p. 2/3 on random streams uses at least D^(lin,U)_(1/3)(f) bits",
            "derivation": f"smallest d with (1 - w_d)/2 <= 1/3 is {d} (w_d = {prof.w[d]})",
        },
        "adversarial_streams": {
            "statement": "space >= R^lin_(6 delta)(f) - O(log n + log(1/delta)) for error delta",
        },
    }


def model1_errors(inst: SketchInstance, f: BoolFun, trials: int, seed=0, fresh=None) -> dict:
    """Run model-1 streams end to end and compare with f(freq).

    With ``fresh`` (a scheme) every stream gets its own instance.  Also checks
    that the streaming answer equals the induced one-way protocol on
    (freq of first half, freq of second half).
    """
    wrong = 0
    mismatch = 0
    for t in range(trials):
        s, split = gen_stream(1, f.n, int(derive_rng(seed, "model1", t).integers(0, 2**63)))
        use = fresh.sample(t) if fresh is not None else inst
        out = run(use, s)["output"]
        x, y = s.freq(0, split), s.freq(split)
        wrong += out != f(x ^ y)
        cols = [int(c) for c in use.cols]
        mx = my = 0
        for i in range(f.n):
            if (x >> i) & 1:
                mx ^= cols[i]
            if (y >> i) & 1:
                my ^= cols[i]
        proto = int(use.decode_many(np.array([mx ^ my], dtype=np.uint64))[0])
        mismatch += proto != out
    return {"errors": int(wrong), "trials": trials, "rate": wrong / trials, "protocol_mismatches": int(mismatch)}
