"""F_2-sketch schemes and their error.

A scheme is a seeded distribution over instances.  An instance is a k x n
GF(2) matrix plus a decoder on F_2^k.  Matrices are also kept column-wise
(``cols[i]`` = the k-bit column of coordinate i) so a whole batch of inputs can
be sketched with numpy by XOR-ing columns; this works for n <= 64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.stats import beta as beta_dist

from ._backend import kernels
from .boolfn import BoolFun, builtin, ltf_fn, popcount_array, read_ltf, wht
from .errors import CAPS, CapExceededError, ValidationError
from .fourierdim import exact_dim
from .gf2 import Subspace, bits_from_str, bits_to_str
from .rng import derive_rng

DECODER_TABLE_MAX_K = 20


def _cols_from_rows(rows, n):
    cols = np.zeros(n, dtype=np.uint64)
    for j, r in enumerate(rows):
        for i in range(n):
            if (r >> i) & 1:
                cols[i] |= np.uint64(1) << np.uint64(j)
    return cols


def sketch_many(cols, xs) -> np.ndarray:
    """M x for every x in ``xs`` (uint64 arrays), via XOR of gathered columns."""
    xs = np.asarray(xs, dtype=np.uint64)
    out = np.zeros(xs.shape, dtype=np.uint64)
    one = np.uint64(1)
    for i, c in enumerate(cols):
        if c:
            hit = ((xs >> np.uint64(i)) & one).astype(bool)
            out[hit] ^= c
    return out


class SketchInstance:
    """One sampled (matrix, decoder) pair with a table decoder."""

    def __init__(self, n, rows, table):
        self.n = n
        self.rows = tuple(int(r) for r in rows)
        self.k = len(self.rows)
        self.cols = _cols_from_rows(self.rows, n)
        self.table = np.asarray(table, dtype=np.int8)
        if self.table.shape[0] != 1 << self.k:
            raise ValidationError("decoder table must have 2^k entries")

    def sketch(self, x: int) -> int:
        s = 0
        for j, r in enumerate(self.rows):
            s |= ((r & x).bit_count() & 1) << j
        return s

    def decode_many(self, s) -> np.ndarray:
        return self.table[np.asarray(s, dtype=np.int64)]

    def evaluate(self, x: int) -> int:
        return int(self.decode_many(np.array([self.sketch(int(x))]))[0])

    def evaluate_many(self, xs) -> np.ndarray:
        return self.decode_many(sketch_many(self.cols, xs))


class SetDecoderInstance(SketchInstance):
    """Outputs ``inside`` when the sketch lands in a stored image set, else ``-inside``."""

    def __init__(self, n, rows, images, inside):
        self.n = n
        self.rows = tuple(int(r) for r in rows)
        self.k = len(self.rows)
        self.cols = _cols_from_rows(self.rows, n)
        self.images = np.unique(np.asarray(images, dtype=np.uint64))
        self.inside = int(inside)
        self.table = None

    def decode_many(self, s):
        s = np.asarray(s, dtype=np.uint64)
        pos = np.searchsorted(self.images, s)
        pos = np.minimum(pos, max(len(self.images) - 1, 0))
        hit = (self.images[pos] == s) if len(self.images) else np.zeros(s.shape, dtype=bool)
        return np.where(hit, self.inside, -self.inside).astype(np.int8)

    def decoder_table(self):
        t = np.full(1 << self.k, -self.inside, dtype=np.int8)
        t[self.images.astype(np.int64)] = self.inside
        return t


@dataclass
class SketchScheme:
    kind: str
    n: int
    k: int
    seed: int = 0
    params: dict = field(default_factory=dict)
    _sampler: object = None
    _fixed: SketchInstance | None = None
    _build: object = None  # rows -> instance, for schemes with uniform random matrices

    @property
    def deterministic(self) -> bool:
        return self._fixed is not None

    def sample(self, index: int = 0) -> SketchInstance:
        if self._fixed is not None:
            return self._fixed
        return self._sampler(derive_rng(self.seed, self.kind, index))

    def to_json(self) -> dict:
        out = {"k": self.k, "n": self.n, "kind": self.kind, "seed": self.seed, "params": self.params}
        if self._fixed is not None:
            inst = self._fixed
            out["matrix"] = [bits_to_str(r, self.n) for r in inst.rows]
            if self.k <= DECODER_TABLE_MAX_K:
                out["decoder"] = pack_decoder(inst.table)
        return out


def pack_decoder(table) -> str:
    """Hex string of the 2^k-bit integer whose bit s is 1 iff the decoder outputs -1 at s."""
    bits = (np.asarray(table) == -1).astype(np.uint8)
    v = int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")
    width = max(1, (len(bits) + 3) // 4)
    return format(v, f"0{width}x")


def unpack_decoder(hexstr: str, k: int) -> np.ndarray:
    v = int(hexstr, 16)
    if v >> (1 << k):
        raise ValidationError("decoder hex wider than 2^k bits")
    return np.array([-1 if (v >> s) & 1 else 1 for s in range(1 << k)], dtype=np.int8)


def _fixed_scheme(kind, n, rows, table, params=None):
    inst = SketchInstance(n, rows, table)
    return SketchScheme(kind, n, inst.k, 0, params or {}, None, inst)


# deterministic ---------------------------------------------------------------


def _representatives(basis, k):
    """For each s in F_2^k an x with row_j . x = s_j (pivots are cleared in the other rows)."""
    piv = [(r & -r).bit_length() - 1 for r in basis]
    reps = np.zeros(1 << k, dtype=np.int64)
    for j, p in enumerate(piv):
        reps[1 << j : 1 << (j + 1)] = reps[: 1 << j] | (1 << p)
    return reps


def deterministic_sketch(f: BoolFun) -> SketchScheme:
    """Exact sketch on a basis of the spectral span: zero error."""
    k, span = exact_dim(f)
    if k > DECODER_TABLE_MAX_K:
        raise CapExceededError(f"Fourier dimension {k} exceeds decoder table cap {DECODER_TABLE_MAX_K}")
    table = f.table[_representatives(span.basis, k)]
    return _fixed_scheme("deterministic", f.n, span.basis, table, {"fn": f.name})


# sign trick ------------------------------------------------------------------


def spectral_projection(f: BoolFun, A: Subspace) -> np.ndarray:
    """2^n * g(s) for s in F_2^d, g = projection of f onto the characters in A."""
    d = A.dim
    c = wht(f).coeffs
    elems = A.elements_array() if d else np.zeros(1, dtype=np.int64)
    # elems[u] = sum_j u_j b_j, so h(u) = c(elems[u]) and g(s) = sum_u h(u) (-1)^(u.s)
    return kernels.fwht(c[elems])


def _coset_counts(f: BoolFun, inst: SketchInstance):
    xs = np.arange(1 << f.n, dtype=np.uint64)
    s = sketch_many(inst.cols, xs).astype(np.int64)
    neg = np.bincount(s, weights=(f.table == -1), minlength=1 << inst.k).astype(np.int64)
    tot = np.bincount(s, minlength=1 << inst.k).astype(np.int64)
    return tot - neg, neg


def sign_trick_sketch(f: BoolFun, A: Subspace) -> tuple[SketchScheme, Fraction]:
    """Threshold the spectral projection of f onto A; the threshold minimises uniform error exactly.

    Decoder at s is +1 iff g(s) >= theta (so g = theta maps to +1).
    """
    if A.n != f.n:
        raise ValidationError("subspace and function arity differ")
    d = A.dim
    if d > DECODER_TABLE_MAX_K:
        raise CapExceededError(f"d={d} exceeds decoder table cap {DECODER_TABLE_MAX_K}")
    g = spectral_projection(f, A)
    probe = SketchInstance(f.n, A.basis, np.ones(1 << d, dtype=np.int8))
    pos, neg = _coset_counts(f, probe)
    # candidate thresholds: each distinct value v of g (error = pos below v + neg at or above v), then +inf
    uniq = np.unique(g)
    below = np.array([int(pos[g < v].sum()) + int(neg[g >= v].sum()) for v in uniq], dtype=np.int64)
    j = int(np.argmin(below))
    if below[j] <= int(pos.sum()):
        theta = int(uniq[j])
        table = np.where(g >= theta, 1, -1).astype(np.int8)
        theta_str = str(Fraction(theta, 1 << f.n))
    else:
        table = -np.ones(1 << d, dtype=np.int8)
        theta_str = "inf"
    scheme = _fixed_scheme("sign-trick", f.n, A.basis, table, {"fn": f.name, "theta": theta_str})
    err = Fraction(int(np.where(table == 1, neg, pos).sum()), 1 << f.n)
    return scheme, err


# random parities -------------------------------------------------------------


def random_parity_width(minority_count: int, delta) -> int:
    """Smallest k with 2^k * delta >= 2 |T|."""
    delta = Fraction(delta)
    if minority_count == 0:
        return 0
    k = 0
    while (1 << k) * delta < 2 * minority_count:
        k += 1
    return k


def _random_rows(rng, k, n):
    return [int(v) for v in _random_words(rng, k, n)]


def _random_words(rng, count, n):
    out = []
    for _ in range(count):
        v = 0
        for start in range(0, n, 32):
            w = min(32, n - start)
            v |= int(rng.integers(0, 1 << w)) << start
        out.append(v)
    return out


def random_parity_sketch(f: BoolFun, delta, seed=0, decoder="equality") -> SketchScheme:
    """k uniformly random parities, k = ceil(log2(2|T|/delta)) with T the minority set of f.

    ``decoder="equality"`` outputs the minority value exactly when the sketch of
    x equals the sketch of some point of T; every x then errs with
    probability at most |T|/2^k <= delta/2.  ``decoder="ml"`` takes the
    majority of f inside each sketch coset (ties -> +1).
    """
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValidationError("delta must lie in (0, 1)")
    if decoder not in ("equality", "ml"):
        raise ValidationError(f"unknown decoder {decoder!r}")
    val, cnt = f.minority()
    n = f.n
    k = random_parity_width(cnt, delta)
    majority = -val
    T = np.flatnonzero(f.table == val).astype(np.uint64)
    params = {"fn": f.name, "delta": str(delta), "decoder": decoder, "minority": val, "minority_size": cnt}

    if k == 0:
        return _fixed_scheme("random-parity", n, (), np.array([majority], dtype=np.int8), params)
    if k > 62:
        raise CapExceededError(f"sketch width {k} exceeds 62")

    def build(rows):
        if decoder == "equality":
            cols = _cols_from_rows(rows, n)
            return SetDecoderInstance(n, rows, sketch_many(cols, T), val)
        if k > DECODER_TABLE_MAX_K:
            raise CapExceededError("ML decoder needs k <= 20")
        inst = SketchInstance(n, rows, np.ones(1 << k, dtype=np.int8))
        pos, neg = _coset_counts(f, inst)
        inst.table = np.where(neg > pos, -1, 1).astype(np.int8)
        return inst

    def sample(rng):
        return build(_random_rows(rng, k, n))

    return SketchScheme("random-parity", n, k, int(seed), params, sample, None, build)


# linear threshold functions --------------------------------------------------


@dataclass
class LtfSpec:
    """Monotone LTF: output -1 iff sum_i w_i x_i >= theta.  Weights sorted nonincreasing."""

    weights: list
    theta: Fraction
    margin: Fraction | None = None
    sketch_margin: Fraction | None = None

    def __post_init__(self):
        ws = [Fraction(w) for w in self.weights]
        if any(w < 0 for w in ws):
            raise ValidationError("LTF weights must be nonnegative")
        if any(a < b for a, b in zip(ws, ws[1:])):
            raise ValidationError("LTF weights must be nonincreasing")
        self.weights = ws
        self.theta = Fraction(self.theta)
        if self.margin is None:
            self.margin = ltf_margin(ws, self.theta)
        if self.margin <= 0:
            raise ValidationError("LTF margin must be positive")

    @property
    def n(self):
        return len(self.weights)

    @classmethod
    def hamge(cls, n, k):
        """Ham_{>=k} with w_i = 1/n and threshold halfway between k-1 and k."""
        return cls([Fraction(1, n)] * n, Fraction(2 * k - 1, 2 * n))

    @classmethod
    def from_text(cls, text):
        w, theta = read_ltf(text)
        order = sorted(w, reverse=True)
        return cls(order, theta)

    def normalized(self):
        total = sum(self.weights)
        if total == 0:
            raise ValidationError("all weights are zero")
        sm = self.sketch_margin / total if self.sketch_margin is not None else None
        return LtfSpec([w / total for w in self.weights], self.theta / total, self.margin / total, sm)

    def ratio(self) -> Fraction:
        return self.theta / self.margin

    def to_boolfun(self) -> BoolFun:
        return ltf_fn(self.weights, self.theta)

    def evaluate_many(self, xs) -> np.ndarray:
        """-1/+1 outputs for uint64 inputs (n <= 64), exact integer arithmetic."""
        xs = np.asarray(xs, dtype=np.uint64)
        den = math.lcm(*(w.denominator for w in self.weights + [self.theta]))
        iw = [int(w * den) for w in self.weights]
        acc = np.zeros(xs.shape, dtype=object if max(iw, default=0) * self.n >= 2**62 else np.int64)
        one = np.uint64(1)
        for i, w in enumerate(iw):
            if w:
                acc = acc + ((xs >> np.uint64(i)) & one).astype(np.int64) * w
        return np.where(acc >= int(self.theta * den), -1, 1).astype(np.int8)

    def to_dict(self):
        return {
            "weights": [str(w) for w in self.weights],
            "theta": str(self.theta),
            "margin": str(self.margin),
            "sketch_margin": str(self.sketch_margin) if self.sketch_margin is not None else None,
        }


def _subset_sums(ws):
    sums = np.zeros(1, dtype=np.int64)
    for w in ws:
        sums = np.concatenate([sums, sums + w])
    return sums


def ltf_margin(weights, theta) -> Fraction:
    """min over x of |sum w_i x_i - theta|, exact.

    Uniform weights use a closed form; otherwise all subset sums are scanned
    (meet in the middle for n <= 40).
    """
    ws = [Fraction(w) for w in weights]
    theta = Fraction(theta)
    n = len(ws)
    if n == 0:
        return abs(theta)
    if all(w == ws[0] for w in ws):
        w = ws[0]
        if w == 0:
            return abs(theta)
        j = min(max(math.floor(theta / w), 0), n)
        return min(abs(i * w - theta) for i in {j, min(j + 1, n)})
    if n > 40:
        raise CapExceededError("margin of a non-uniform LTF with n > 40 must be supplied")
    den = math.lcm(*(w.denominator for w in ws + [theta]))
    iw = [int(w * den) for w in ws]
    ith = int(theta * den)
    h = n // 2
    left = np.unique(_subset_sums(iw[:h]))
    right = np.unique(_subset_sums(iw[h:]))
    # for each left sum, nearest right sum to ith - left
    target = ith - left
    pos = np.searchsorted(right, target)
    best = None
    for p in (pos - 1, pos):
        ok = (p >= 0) & (p < len(right))
        diff = np.abs(left[ok] + right[p[ok]] - ith)
        cand = int(diff.min()) if diff.size else None
        if cand is not None and (best is None or cand < best):
            best = cand
    return Fraction(best, den)


def ltf_preprocess(spec: LtfSpec, verify_up_to: int = 16) -> LtfSpec:
    """Drop weights below twice the margin and renormalise so the weights sum to 1.

    The function is unchanged (checked on the full cube when n <= verify_up_to).
    ``margin`` stays the true margin of the result; ``sketch_margin`` is w_n/2.
    """
    m = spec.margin
    if m <= 0:
        raise ValidationError("LTF margin must be positive")
    kept = [w for w in spec.weights if w >= 2 * m]
    if not kept:
        raise ValidationError("every weight is below twice the margin")
    pruned = LtfSpec(kept, spec.theta, ltf_margin(kept, spec.theta))
    if spec.n <= verify_up_to:
        full = spec.to_boolfun().table
        idx = np.arange(1 << spec.n, dtype=np.int64) & ((1 << len(kept)) - 1)
        if not np.array_equal(full, pruned.to_boolfun().table[idx]):  # pragma: no cover
            raise AssertionError("pruning changed the function")
    out = pruned.normalized()
    out.sketch_margin = out.weights[-1] / 2
    return out


@dataclass
class LtfStageConfig:
    reps: int = 48
    fire_fraction: Fraction = Fraction(3, 10)
    bucket_const: int = 100
    direct_ratio: int = 100


class BelowThreshold:
    """All x with sum w_i x_i < theta, found by depth-first search over supports.

    ``parent[i]`` is the index of x_i with its highest coordinate ``coord[i]``
    removed, so images under a linear map can be built level by level.
    """

    def __init__(self, spec: LtfSpec, cap=None):
        limit = CAPS["ltf_support"] if cap is None else cap
        if spec.n > 64:
            raise CapExceededError("LTF sketches support n <= 64")
        den = math.lcm(*(w.denominator for w in spec.weights + [spec.theta]))
        iw = [int(w * den) for w in spec.weights]
        ith = int(spec.theta * den)
        xs, parent, coord, level = [0], [-1], [-1], [0]
        stack = [(0, 0, 0, 0)]  # (index, total, next coordinate, level)
        while stack:
            idx, total, start, lev = stack.pop()
            for i in range(start, spec.n):
                t = total + iw[i]
                if t < ith:
                    xs.append(xs[idx] | (1 << i))
                    parent.append(idx)
                    coord.append(i)
                    level.append(lev + 1)
                    if len(xs) > limit:
                        raise CapExceededError(f"more than {limit} inputs below threshold (--caps ltf_support=...)")
                    stack.append((len(xs) - 1, t, i + 1, lev + 1))
        self.xs = np.array(xs, dtype=np.uint64)
        self.parent = np.array(parent, dtype=np.int64)
        self.coord = np.array(coord, dtype=np.int64)
        self.level = np.array(level, dtype=np.int64)
        self._levels = [np.flatnonzero(self.level == L) for L in range(1, int(self.level.max()) + 1)]

    def __len__(self):
        return len(self.xs)

    def images(self, cols) -> np.ndarray:
        cols = np.asarray(cols, dtype=np.uint64)
        out = np.zeros(len(self.xs), dtype=np.uint64)
        for idx in self._levels:
            out[idx] = out[self.parent[idx]] ^ cols[self.coord[idx]]
        return out


def enumerate_below_threshold(spec: LtfSpec, cap=None) -> np.ndarray:
    return np.sort(BelowThreshold(spec, cap).xs)


class LtfInstance(SketchInstance):
    """Composite instance: a density test on sparse parities, then a hashed set-equality sketch."""

    def __init__(self, n, rows1, rows3, cols3, images, fire_at):
        self.n = n
        self.k1 = len(rows1)
        self.k3 = len(rows3)
        self.k = self.k1 + self.k3
        self.rows = tuple(rows1) + tuple(rows3)
        self.cols1 = _cols_from_rows(rows1, n)
        self.cols3 = np.asarray(cols3, dtype=np.uint64)
        images = np.asarray(images, dtype=np.uint64)
        if self.k3 <= 26:
            self._bitmap = np.zeros(1 << self.k3, dtype=bool)
            self._bitmap[images.astype(np.int64)] = True
            self.images = None
        else:
            self._bitmap = None
            self.images = np.unique(images)
        self.fire_at = fire_at
        self.table = None

    @property
    def cols(self):
        if self.k > 64:
            raise CapExceededError("combined sketch wider than 64 bits")
        return self.cols1 | (self.cols3 << np.uint64(self.k1)) if self.k1 else self.cols3

    def _below(self, s3):
        if self._bitmap is not None:
            return self._bitmap[s3.astype(np.int64)]
        pos = np.minimum(np.searchsorted(self.images, s3), len(self.images) - 1)
        return self.images[pos] == s3

    def _combine(self, s1, s3):
        out = np.where(self._below(s3), 1, -1).astype(np.int8)
        if self.k1:
            out[popcount_array(s1.astype(np.int64)) >= self.fire_at] = -1
        return out

    def evaluate_many(self, xs):
        xs = np.asarray(xs, dtype=np.uint64)
        s1 = sketch_many(self.cols1, xs) if self.k1 else None
        return self._combine(s1, sketch_many(self.cols3, xs))

    def evaluate(self, x):
        return int(self.evaluate_many(np.array([x], dtype=np.uint64))[0])

    def decode_many(self, s):
        s = np.asarray(s, dtype=np.uint64)
        s1 = s & np.uint64((1 << self.k1) - 1) if self.k1 else None
        return self._combine(s1, s >> np.uint64(self.k1))


def ltf_sketch(spec: LtfSpec, delta, seed=0, config: LtfStageConfig | None = None) -> SketchScheme:
    """Hashing sketch for a monotone LTF with margin.

    If theta/m is at most ``direct_ratio`` only the set-equality stage runs,
    with the whole error budget.  Otherwise a density test on ``reps`` sparse
    parities (each coordinate kept with probability 10 m^2/theta^2) outputs -1
    when at least a ``fire_fraction`` of them are odd; the remaining inputs are
    hashed into B = ceil(C theta^4/m^4) buckets that share a random column, and
    the set-equality stage runs on the hashed coordinates.  Each stage gets a
    third of delta.
    """
    cfg = config or LtfStageConfig()
    delta = Fraction(delta)
    if not 0 < delta < Fraction(1, 2):
        raise ValidationError("delta must lie in (0, 1/2)")
    spec = spec if spec.sketch_margin is not None else ltf_preprocess(spec)
    n = spec.n
    if n > 64:
        raise CapExceededError("LTF sketches support n <= 64")
    R = spec.ratio()
    direct = R <= cfg.direct_ratio
    T = BelowThreshold(spec)
    if direct:
        delta3 = delta
        buckets = None
        k1 = 0
        p1 = None
        size_bound = len(T)
    else:
        delta3 = delta / 3
        buckets = math.ceil(cfg.bucket_const * R**4)
        k1 = cfg.reps
        p1 = 10 / R**2
        size_bound = min(len(T), (buckets + 1) ** math.ceil(R / 2))
    k3 = max(1, math.ceil(math.log2(2 * size_bound / delta3)))
    fire_at = math.ceil(cfg.fire_fraction * k1) if k1 else 0
    if k1 and fire_at == cfg.fire_fraction * k1:
        fire_at += 1  # strictly more than the fraction
    if k3 > 62:
        raise CapExceededError(f"stage width {k3} exceeds 62")
    params = {
        "ltf": spec.to_dict(),
        "delta": str(delta),
        "ratio": str(R),
        "direct": direct,
        "stage1_reps": k1,
        "stage1_prob": float(p1) if p1 is not None else None,
        "stage1_fire_at": fire_at,
        "buckets": buckets,
        "stage3_width": k3,
        "below_threshold": int(len(T)),
    }

    def sample(rng):
        rows1 = []
        for _ in range(k1):
            keep = rng.random(n) < float(p1)
            rows1.append(sum(1 << i for i in range(n) if keep[i]))
        if buckets:
            # only the buckets that receive a coordinate need a column
            h = rng.integers(0, buckets, size=n)
            used, inv = np.unique(h, return_inverse=True)
            colvals = np.array(_random_words(rng, len(used), k3), dtype=np.uint64)
            cols3 = colvals[inv]
        else:
            cols3 = np.array(_random_words(rng, n, k3), dtype=np.uint64)
        rows3 = [0] * k3
        for i in range(n):
            c = int(cols3[i])
            for j in range(k3):
                if (c >> j) & 1:
                    rows3[j] |= 1 << i
        images = T.images(cols3)
        return LtfInstance(n, rows1, rows3, cols3, images, fire_at)

    return SketchScheme("ltf", n, k1 + k3, int(seed), params, sample)


# evaluation ------------------------------------------------------------------


def clopper_pearson(k: int, N: int, level: float = 0.95) -> tuple[float, float]:
    a = 1 - level
    lo = 0.0 if k == 0 else float(beta_dist.ppf(a / 2, k, N - k + 1))
    hi = 1.0 if k == N else float(beta_dist.ppf(1 - a / 2, k + 1, N - k))
    return lo, hi


def _all_instances(scheme):
    """Every matrix of a uniform random-matrix scheme, each equally likely (tiny k*n only)."""
    k, n = scheme.k, scheme.n
    if scheme._build is None:
        raise ValidationError("exact mode needs an enumerable scheme")
    if k * n > 20:
        raise CapExceededError("exact evaluation of a random scheme needs k*n <= 20")
    for code in range(1 << (k * n)):
        yield scheme._build([(code >> (j * n)) & ((1 << n) - 1) for j in range(k)])


def _trial_instance(scheme, *names):
    if scheme.deterministic:
        return scheme.sample()
    return scheme._sampler(derive_rng(scheme.seed, scheme.kind, *names))


def eval_sketch_error(scheme: SketchScheme, f, mode="exact", trials=1000, seed=0, xs=None, level=0.95):
    """Per-x worst-case and uniform-average misprediction rates.

    ``exact`` needs a deterministic scheme or a random-parity scheme with
    k*n <= 20; it returns Fractions.  ``monte`` samples ``trials`` instances
    and evaluates each on ``xs`` (default: all 2^n inputs), returning rates
    with Clopper-Pearson intervals.
    """
    n = scheme.n
    if xs is None:
        if n > 20:
            raise CapExceededError("pass explicit xs for n > 20")
        xs = np.arange(1 << n, dtype=np.uint64)
    xs = np.asarray(xs, dtype=np.uint64)
    truth = f.evaluate_many(xs) if isinstance(f, LtfSpec) else f.table[xs.astype(np.int64)]
    if mode == "exact":
        if scheme.deterministic:
            insts = [scheme.sample()]
        else:
            insts = _all_instances(scheme)
        errs = np.zeros(xs.shape, dtype=np.int64)
        count = 0
        for inst in insts:
            errs += inst.evaluate_many(xs) != truth
            count += 1
        return {
            "per_x_max": Fraction(int(errs.max()), count),
            "uniform_avg": Fraction(int(errs.sum()), count * len(xs)),
            "instances": count,
        }
    if mode != "monte":
        raise ValidationError(f"unknown mode {mode!r}")
    errs = np.zeros(xs.shape, dtype=np.int64)
    for t in range(trials):
        inst = _trial_instance(scheme, seed, t)
        errs += inst.evaluate_many(xs) != truth
    worst = int(errs.max())
    total = int(errs.sum())
    return {
        "per_x_max": worst / trials,
        "per_x_max_ci": clopper_pearson(worst, trials, level),
        "uniform_avg": total / (trials * len(xs)),
        "uniform_avg_ci": clopper_pearson(total, trials * len(xs), level),
        "trials": trials,
    }


def paired_monte_carlo(scheme: SketchScheme, truth_fn, x_sampler, trials, seed=0, level=0.95):
    """Error rate over ``trials`` independent (instance, x) draws.

    ``x_sampler(rng)`` returns one input; ``truth_fn(xs)`` maps a uint64 array
    of inputs to +-1 values.
    """
    wrong = 0
    for t in range(trials):
        rng = derive_rng(seed, "pair", t)
        inst = _trial_instance(scheme, seed, "pair", t)
        x = np.array([x_sampler(rng)], dtype=np.uint64)
        wrong += int(inst.evaluate_many(x)[0] != truth_fn(x)[0])
    lo, hi = clopper_pearson(wrong, trials, level)
    return {"errors": wrong, "trials": trials, "rate": wrong / trials, "ci": (lo, hi)}


# serialization ---------------------------------------------------------------


def scheme_from_json(obj: dict, fn: BoolFun | None = None) -> SketchScheme:
    """Rebuild a scheme; random kinds are regenerated from their seed and parameters."""
    try:
        kind, n, k = obj["kind"], int(obj["n"]), int(obj["k"])
    except (KeyError, TypeError, ValueError):
        raise ValidationError("scheme JSON needs kind, n, k") from None
    params = obj.get("params", {})
    seed = int(obj.get("seed", 0))
    if kind in ("deterministic", "sign-trick") or "matrix" in obj:
        rows = [bits_from_str(r) for r in obj.get("matrix", [])]
        if len(rows) != k:
            raise ValidationError("matrix row count differs from k")
        if any(len(r) != n for r in obj.get("matrix", [])):
            raise ValidationError("matrix row width differs from n")
        if "decoder" not in obj:
            raise ValidationError("deterministic scheme JSON needs a decoder")
        table = unpack_decoder(obj["decoder"], k)
        return _fixed_scheme(kind, n, rows, table, params)
    if kind == "random-parity":
        f = fn if fn is not None else builtin(params["fn"])
        s = random_parity_sketch(f, Fraction(params["delta"]), seed, params.get("decoder", "equality"))
    elif kind == "ltf":
        lt = params["ltf"]
        spec = LtfSpec([Fraction(w) for w in lt["weights"]], Fraction(lt["theta"]), Fraction(lt["margin"]),
                       Fraction(lt["sketch_margin"]) if lt.get("sketch_margin") else None)
        s = ltf_sketch(spec, Fraction(params["delta"]), seed)
    else:
        raise ValidationError(f"unknown scheme kind {kind!r}")
    if s.k != k or s.n != n:
        raise ValidationError("scheme JSON does not match its regenerated parameters")
    return s
