"""Named end-to-end checks, shared by ``f2sketch check <id>`` and the acceptance tests.

Each check returns a ``CheckResult`` with a pass flag and a details dict that
holds exact values (Fractions are rendered as "p/q" by the CLI).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .boolfn import BoolFun, builtin, compose, popcount_array, wht
from .commsim import (
    PairDistribution,
    best_one_bit_error,
    exact_error,
    message_bound_check,
    optimal_rectangle_error,
    disagreement_distribution,
    trivial_majority_error,
    trivial_majority_protocol,
)
from .errors import ValidationError
from .fourierdim import affine_structure_check, dim_profile, exact_dim, max_subspace_weight
from .gf2 import (
    Gf2Matrix,
    Subspace,
    enumerate_subspaces,
    nullspace,
    odd_set,
    rank,
    set_dominates,
    standard_domination_decompose,
    super_slam,
)
from .rng import derive_rng, random_bits
from .sketch import (
    LtfSpec,
    SketchInstance,
    _coset_counts,
    ltf_preprocess,
    ltf_sketch,
    paired_monte_carlo,
    random_parity_sketch,
)
from .streamsim import automaton_from_sketch, check_path_independence, coset_check, kernel, model1_errors


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name} ({self.seconds:.1f}s)"


def _timed(name, fn, **kw):
    t = time.perf_counter()
    ok, details = fn(**kw)
    return CheckResult(name, bool(ok), details, time.perf_counter() - t)


# 1 ---------------------------------------------------------------------------


def builtin_specs(nmax=12):
    specs = []
    for n in range(1, nmax + 1):
        specs += [f"parity:{n}", f"and:{n}", f"or:{n}", f"maj:{n}", f"const:{n}", f"const:{n}:-1"]
        specs += [f"hamge:{n}:{k}" for k in range(n + 1)]
        if n % 2 == 0:
            specs.append(f"ip:{n}")
        specs.append("chi:" + "1" * n)
    specs += ["maj3k:1", "maj3k:2", "addr:1", "addr:2", "addr:4", "addr:8"]
    return specs


def parseval(seed=0, per_n=100, nmax=12):
    bad = []
    count = 0
    for spec in builtin_specs(nmax):
        f = builtin(spec)
        count += 1
        if wht(f).sum_squares() != 1 << (2 * f.n):
            bad.append(spec)
    for n in range(1, nmax + 1):
        for i in range(per_n):
            bias = float(derive_rng(seed, "parseval-bias", n, i).random())
            f = builtin(f"random:{n}:{bias!r}:{seed * 1000 + i}")
            count += 1
            if wht(f).sum_squares() != 1 << (2 * n):
                bad.append(f.name)
    return not bad, {"functions": count, "failures": bad}


# 2 ---------------------------------------------------------------------------


def standard_subspace_weights(f: BoolFun) -> np.ndarray:
    """Weight numerator of span{e_i : i in S} for every S, by a subset-sum transform."""
    acc = wht(f).squares().astype(np.int64).copy()
    n = f.n
    for i in range(n):
        bit = 1 << i
        idx = np.arange(1 << n)
        hi = idx[(idx & bit) != 0]
        acc[hi] += acc[hi ^ bit]
    return acc


def recmaj(k=2, workers=1):
    f = builtin(f"maj3k:{k}")
    n = f.n
    prof = dim_profile(f, workers)
    over = [d for d in range(n + 1) if prof.w[d] > Fraction(4 * d, n)]
    den = 1 << (2 * n)
    std = standard_subspace_weights(f)
    sizes = popcount_array(np.arange(1 << n))
    # weight/den <= |S|/n  <=>  weight * n <= |S| * den
    std_bad = [int(S) for S in np.flatnonzero(std * n > sizes * den)]
    return not over and not std_bad, {
        "n": n,
        "w": prof.w,
        "bound": [Fraction(4 * d, n) for d in range(n + 1)],
        "violations": over,
        "standard_subspaces": 1 << n,
        "standard_violations": std_bad,
    }


# 3 ---------------------------------------------------------------------------


def address(n=4):
    f = builtin(f"addr:{n}")
    prof = dim_profile(f)
    bound = [Fraction(d, n) for d in range(f.n + 1)]
    over = [d for d in range(f.n + 1) if prof.w[d] > bound[d]]
    equal = [d for d in range(f.n + 1) if prof.w[d] == bound[d]]
    return not over, {"arity": f.n, "w": prof.w, "bound": bound, "violations": over, "equality_at": equal}


# 4 ---------------------------------------------------------------------------


def verify_decomposition(L: Subspace):
    """Problems found in the domination output for L (empty list = verified)."""
    d = L.dim
    S1, S2, S3, matching = standard_domination_decompose(L)
    problems = []
    for name, S, cap in (("S1", S1, d - 1), ("S2", S2, d), ("S3", S3, min(2 * d, L.n))):
        if not S.is_standard():
            problems.append(f"{name} not standard")
        if S.dim > cap:
            problems.append(f"dim {name}={S.dim} > {cap}")
    OL = odd_set(L)
    union = odd_set(S1) | odd_set(S2) | odd_set(S3)
    ok, _ = set_dominates(union, OL)
    if not ok:
        problems.append("union does not dominate O(L)")
    # the returned matching itself
    if sorted(x for x, _ in matching) != sorted(OL):
        problems.append("matching does not cover O(L)")
    images = [img for _, img in matching]
    if len(set(images)) != len(images):
        problems.append("matching images not distinct")
    for x, img in matching:
        if img & ~x or img not in union:
            problems.append(f"bad pair {x}->{img}")
            break
    return problems


def random_subspace(rng, n, d):
    while True:
        vecs = [random_bits(rng, n) for _ in range(d)]
        if rank(vecs) == d:
            return Subspace(n, tuple(vecs))


def domination(trials=500, seed=0):
    rng = derive_rng(seed, "domination")
    failures = []
    for t in range(trials):
        n = int(rng.integers(1, 11))
        d = int(rng.integers(1, min(5, n) + 1))
        L = random_subspace(rng, n, d)
        probs = verify_decomposition(L)
        if probs:
            failures.append({"L": [int(b) for b in L.basis], "n": n, "problems": probs})
    return not failures, {"trials": trials, "failures": failures}


# 5 ---------------------------------------------------------------------------


def sandwich_corpus(seed=0, size=50):
    specs = [
        "maj:3", "and:2", "and:3", "and:4", "or:2", "or:3", "or:4", "parity:1", "parity:2",
        "parity:3", "parity:4", "maj:4", "hamge:4:1", "hamge:4:2", "hamge:4:3", "hamge:4:4",
        "hamge:3:2", "ip:2", "ip:4", "addr:2", "chi:1000:0", "chi:0110:3", "chi:1011:5,9",
        "const:3", "const:4:-1",
    ]
    fns = [builtin(s) for s in specs]
    i = 0
    while len(fns) < size:
        n = 2 + i % 3
        bias = [0.5, 0.25, 0.125][i % 3]
        fns.append(builtin(f"random:{n}:{bias}:{seed * 100 + i}"))
        i += 1
    return fns


def optimal_sketch_errors(f: BoolFun) -> list[Fraction]:
    """Exhaustive: for each d, min over d-dim subspaces of the per-coset majority error."""
    out = []
    for d in range(f.n + 1):
        best = None
        for A in enumerate_subspaces(f.n, d):
            pos, neg = _coset_counts(f, SketchInstance(f.n, A.basis, np.ones(1 << d, dtype=np.int8)))
            err = int(np.minimum(pos, neg).sum())
            best = err if best is None else min(best, err)
        out.append(Fraction(best, 1 << f.n))
    return out


def sandwich(seed=0):
    rows = []
    failures = []
    for f in sandwich_corpus(seed):
        prof = dim_profile(f)
        opt = optimal_sketch_errors(f)
        uni = PairDistribution("uniform", f.n)
        zero_bit = optimal_rectangle_error(np.zeros(1 << f.n, dtype=np.int64), f, uni)
        one_bit, _ = best_one_bit_error(f, uni)
        for d in range(f.n + 1):
            w = prof.w[d]
            upper = (1 - w) / 2
            # lower bound (1 - sqrt w)/2 <= opt  <=>  1 - 2 opt <= sqrt w
            t = 1 - 2 * opt[d]
            lower_ok = t <= 0 or t * t <= w
            if opt[d] > upper or not lower_ok:
                failures.append({"fn": f.name, "d": d, "opt": opt[d], "w": w})
        oneway = []
        for c, err in ((0, zero_bit), (1, one_bit)):
            d = c + 1
            if d > f.n:
                continue
            gap = prof.w[d] - prof.w[d - 1]
            if gap > 0:
                ok = err > gap / 4
                oneway.append({"c": c, "error": err, "delta": gap / 4, "ok": ok})
                if not ok:
                    failures.append({"fn": f.name, "c": c, "error": err, "delta": gap / 4})
        rows.append({"fn": f.name, "n": f.n, "w": prof.w, "opt": opt, "oneway": oneway})
    return not failures, {"functions": len(rows), "failures": failures, "rows": rows}


# 6 ---------------------------------------------------------------------------


def hard_weight_sampler(n, weights):
    def sample(rng):
        w = int(weights[int(rng.integers(0, len(weights)))])
        idx = rng.choice(n, w, replace=False)
        v = 0
        for i in idx:
            v |= 1 << int(i)
        return v

    return sample


def ltf(n=64, k=4, delta=Fraction(1, 10), trials=10_000, seed=0, ci_max=0.12):
    spec = ltf_preprocess(LtfSpec.hamge(n, k))
    scheme = ltf_sketch(spec, delta, seed)
    mc = paired_monte_carlo(scheme, spec.evaluate_many, hard_weight_sampler(n, [k - 1, k, k + 1]), trials, seed)
    ok = scheme.k <= 64 and mc["rate"] <= delta and mc["ci"][1] <= ci_max
    return ok, {
        "ratio": spec.ratio(),
        "width": scheme.k,
        "params": {k2: v for k2, v in scheme.params.items() if k2 != "ltf"},
        "errors": mc["errors"],
        "trials": trials,
        "rate": mc["rate"],
        "ci_upper": mc["ci"][1],
    }


# 7 ---------------------------------------------------------------------------


def onebit(spec="chi:1000:0", threshold=Fraction(1, 200)):
    f = builtin(spec)
    mu = disagreement_distribution(f)
    err, M = best_one_bit_error(f, mu)
    prop = message_bound_check(f, mu)
    return err > threshold and prop["holds"], {
        "fn": spec,
        "z": mu.z,
        "eps": prop["eps"],
        "min_error": err,
        "witness_message": M,
        "messages": 1 << (1 << f.n),
        "prop_worst": prop["worst_value"],
        "prop_bound": prop["bound"],
    }


# 8 ---------------------------------------------------------------------------


def _fit_through_origin(xs, ys):
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    return float((xs * ys).sum() / (xs * xs).sum())


def maj_tightness(ns=(5, 7, 9, 11), tol=0.5):
    w_top = []
    proto = []
    for n in ns:
        f = builtin(f"maj:{n}")
        w, _ = max_subspace_weight(f, n - 1)
        w_top.append(w)
        p = trivial_majority_protocol(n)
        e = exact_error(p, f, PairDistribution("uniform", n))
        if e != trivial_majority_error(n):  # pragma: no cover
            raise AssertionError("protocol error disagrees with the closed form")
        proto.append(e)
    inv = [1 / math.sqrt(n) for n in ns]
    gaps = [float(1 - w) for w in w_top]
    gamma = _fit_through_origin(inv, gaps)
    within = [abs(g / (gamma * x) - 1) <= tol for g, x in zip(gaps, inv)]
    scaled = [float(e) * math.sqrt(n) for e, n in zip(proto, ns)]
    c = max(scaled)
    proto_ok = [s >= (1 - tol) * c for s in scaled]
    return gamma > 0 and all(within) and all(proto_ok), {
        "n": list(ns),
        "w_n_minus_1": w_top,
        "gamma": gamma,
        "relative_deviation": [g / (gamma * x) - 1 for g, x in zip(gaps, inv)],
        "protocol_error": proto,
        "c": c,
        "error_times_sqrt_n": scaled,
    }


# 9 ---------------------------------------------------------------------------


def random_matrix(rng, r, n):
    return Gf2Matrix(n, tuple(random_bits(rng, n) for _ in range(r)))


def random_balanced(rng, m):
    bits = np.zeros(1 << m, dtype=np.int8)
    bits[rng.permutation(1 << m)[: 1 << (m - 1)]] = 1
    return BoolFun.from_bits(m, bits)


def appendix_ab(pairs=200, comps=100, seed=0, eps_max=Fraction(1, 20)):
    rng = derive_rng(seed, "slam")
    slam_bad = []
    for _ in range(pairs):
        a, b = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        A, B = random_matrix(rng, a, n), random_matrix(rng, b, m)
        if rank(super_slam(A, B).rows) < rank(A.rows) * rank(B.rows):
            slam_bad.append((A.rows, B.rows))
    rng = derive_rng(seed, "compose")
    comp_bad = []
    for _ in range(comps):
        while True:
            n, m = int(rng.integers(1, 7)), int(rng.integers(1, 7))
            if n * m <= 12:
                break
        f = BoolFun.from_bits(n, rng.integers(0, 2, 1 << n).astype(np.int8))
        g = random_balanced(rng, m)
        if exact_dim(compose(f, g))[0] < exact_dim(f)[0] * exact_dim(g)[0]:
            comp_bad.append((f.table.tolist(), g.table.tolist()))
    ip = affine_structure_check(builtin("ip:8"), 6, Fraction(1, 2) - eps_max)
    eps = Fraction(1, 2) - ip.worst_bias
    ok_ip = eps < eps_max and ip.lower_bound >= 3
    return not slam_bad and not comp_bad and ok_ip, {
        "slam_pairs": pairs,
        "slam_failures": slam_bad,
        "compositions": comps,
        "composition_failures": comp_bad,
        "ip_worst_min_side": ip.worst_bias,
        "ip_eps": eps,
        "ip_eps_required_below": eps_max,
        "ip_worst_coset": str(ip.worst_coset),
        "ip_disperser": ip.disperser,
        "ip_lower_bound": ip.lower_bound,
    }


# 10 --------------------------------------------------------------------------


def streaming(matrices=100, streams=10_000, seed=0, delta=Fraction(1, 8), slack=0.02):
    rng = derive_rng(seed, "automata")
    bad = []
    for t in range(matrices):
        n = 8
        k = int(rng.integers(1, 9))
        rows = [random_bits(rng, n) for _ in range(k)]
        table = np.where(rng.random(1 << k) < 0.5, 1, -1)
        inst = SketchInstance(n, rows, table)
        a = automaton_from_sketch(inst)
        pi = check_path_independence(a)
        cs, _ = coset_check(a)
        ker = kernel(a) if pi is None else None
        if pi is not None or not cs or ker != nullspace(Gf2Matrix(n, tuple(rows))):
            bad.append(t)
    f = builtin("hamge:8:7")
    scheme = random_parity_sketch(f, delta, seed)
    run = model1_errors(None, f, streams, seed=seed, fresh=scheme)
    ok = not bad and run["rate"] <= float(delta) + slack and run["protocol_mismatches"] == 0
    return ok, {"matrices": matrices, "automaton_failures": bad, "delta": delta, "width": scheme.k, **run}


CHECKS = {
    "parseval": parseval,
    "recmaj-4d-over-n": recmaj,
    "addr-d-over-n": address,
    "domination": domination,
    "sandwich": sandwich,
    "ltf-sketch": ltf,
    "onebit": onebit,
    "maj-tightness": maj_tightness,
    "slam-composition-ip": appendix_ab,
    "streaming": streaming,
}


def run_check(name: str, **kw) -> CheckResult:
    if name not in CHECKS:
        raise ValidationError(f"unknown check {name!r}; known: {', '.join(CHECKS)}")
    return _timed(name, CHECKS[name], **kw)
