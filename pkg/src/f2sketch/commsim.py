"""One-way protocols for XOR functions f+(x, y) = f(x + y).

Alice holds x and sends message(x) in F_2^c; Bob holds y and outputs
decoder(y, message).  Pair distributions are kept as integer weights over a
power-of-two denominator so every error is an exact dyadic fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._backend import kernels
from .boolfn import BoolFun, linear_distance, popcount_array
from .errors import ValidationError, check_cap
from .sketch import SketchScheme, sketch_many


@dataclass
class PairDistribution:
    """``uniform``: independent uniform x, y.  ``sec7`` (disagreement): y uniform, x = y + z w.p. 1/2, else uniform."""

    kind: str
    n: int
    z: int = 0

    def __post_init__(self):
        if self.kind not in ("uniform", "sec7"):
            raise ValidationError(f"unknown distribution {self.kind!r}")

    @property
    def denominator(self) -> int:
        return 1 << (2 * self.n) if self.kind == "uniform" else 1 << (2 * self.n + 1)

    def row(self, y: int) -> np.ndarray:
        """Integer weights w(x, y) for all x at fixed y."""
        if self.kind == "uniform":
            return np.ones(1 << self.n, dtype=np.int64)
        w = np.ones(1 << self.n, dtype=np.int64)
        w[y ^ self.z] += 1 << self.n
        return w

    def matrix(self) -> np.ndarray:
        """W[y, x]; only for small n."""
        return np.stack([self.row(y) for y in range(1 << self.n)])


def disagreement_distribution(f: BoolFun) -> PairDistribution:
    """z = smallest input where f disagrees with its closest character."""
    eps, S = linear_distance(f)
    x = np.arange(1 << f.n, dtype=np.int64)
    chi = 1 - 2 * (popcount_array(x & S) & 1)
    bad = np.flatnonzero(f.table != chi)
    if bad.size == 0:
        raise ValidationError("f is a character; no z disagrees with it")
    return PairDistribution("sec7", f.n, int(bad[0]))


def make_distribution(kind: str, f: BoolFun) -> PairDistribution:
    return disagreement_distribution(f) if kind == "sec7" else PairDistribution(kind, f.n)


class OneWayProtocol:
    """Message table plus either a decoder table [y, m], a vectorised decoder, or neither (optimal Bob)."""

    def __init__(self, n, c, message, decoders=None, decoder_fn=None):
        self.n = int(n)
        self.c = int(c)
        self.message = np.asarray(message, dtype=np.int64)
        if self.message.shape[0] != 1 << self.n:
            raise ValidationError("message table must have 2^n entries")
        if np.any((self.message < 0) | (self.message >> self.c)):
            raise ValidationError(f"message values must fit in {self.c} bits")
        self.decoders = None if decoders is None else np.asarray(decoders, dtype=np.int8)
        if self.decoders is not None and self.decoders.shape != (1 << self.n, 1 << self.c):
            raise ValidationError("decoder table must be 2^n x 2^c")
        self.decoder_fn = decoder_fn

    @property
    def optimal(self) -> bool:
        return self.decoders is None and self.decoder_fn is None

    def outputs(self, y: int) -> np.ndarray:
        """Bob's output for every x at fixed y."""
        if self.decoders is not None:
            return self.decoders[y, self.message]
        if self.decoder_fn is not None:
            return self.decoder_fn(y, self.message)
        raise ValidationError("protocol has no decoder; use optimal_rectangle_error")

    def to_json(self) -> dict:
        out = {"n": self.n, "c": self.c, "message": pack_table(self.message, self.c)}
        if self.decoders is not None:
            out["decoders"] = pack_table((self.decoders == -1).reshape(-1).astype(np.int64), 1)
        return out


def pack_table(values, width) -> str:
    """Hex of sum_i values[i] << (width * i)."""
    v = 0
    for i, x in enumerate(np.asarray(values, dtype=np.int64).tolist()):
        v |= int(x) << (width * i)
    digits = max(1, (width * len(values) + 3) // 4)
    return format(v, f"0{digits}x")


def unpack_table(hexstr, width, count) -> np.ndarray:
    v = int(hexstr, 16)
    if v >> (width * count):
        raise ValidationError("hex table has more bits than expected")
    mask = (1 << width) - 1
    return np.array([(v >> (width * i)) & mask for i in range(count)], dtype=np.int64)


def protocol_from_json(obj) -> OneWayProtocol:
    try:
        n, c = int(obj["n"]), int(obj["c"])
        msg = unpack_table(obj["message"], c, 1 << n)
    except (KeyError, TypeError, ValueError):
        raise ValidationError("protocol JSON needs n, c and a hex message table") from None
    dec = None
    if obj.get("decoders"):
        bits = unpack_table(obj["decoders"], 1, (1 << n) << c)
        dec = np.where(bits.reshape(1 << n, 1 << c) == 1, -1, 1)
    return OneWayProtocol(n, c, msg, dec)


def protocol_from_sketch(scheme: SketchScheme, sample_seed: int = 0) -> OneWayProtocol:
    """Alice sends Mx; Bob decodes Mx + My, which equals the sketch of x + y."""
    if scheme.k > 20:
        raise ValidationError("sketch width above 20 is not supported for protocols")
    check_cap("comm", scheme.n, "arity n")
    inst = scheme.sample(sample_seed)
    xs = np.arange(1 << scheme.n, dtype=np.uint64)
    sk = sketch_many(inst.cols, xs).astype(np.int64)

    def decode(y, msgs):
        return inst.decode_many((msgs ^ sk[y]).astype(np.uint64))

    return OneWayProtocol(scheme.n, scheme.k, sk, decoder_fn=decode)


def _target(f, y):
    return f.table[np.arange(1 << f.n, dtype=np.int64) ^ y]


def exact_error(p: OneWayProtocol, f: BoolFun, mu: PairDistribution) -> Fraction:
    if p.n != f.n or mu.n != f.n:
        raise ValidationError("arity mismatch")
    check_cap("comm", f.n, "arity n")
    if p.optimal:
        return optimal_rectangle_error(p.message, f, mu)
    wrong = 0
    for y in range(1 << f.n):
        miss = p.outputs(y) != _target(f, y)
        wrong += int(mu.row(y)[miss].sum())
    return Fraction(wrong, mu.denominator)


def optimal_rectangle_error(message, f: BoolFun, mu: PairDistribution | None = None) -> Fraction:
    """Error of ``message`` when Bob answers each (y, message) with the weighted majority."""
    mu = mu or PairDistribution("uniform", f.n)
    check_cap("comm", f.n, "arity n")
    message = np.asarray(message, dtype=np.int64)
    size = int(message.max()) + 1 if message.size else 1
    total = 0
    for y in range(1 << f.n):
        w = mu.row(y)
        neg = _target(f, y) == -1
        wn = np.bincount(message, weights=np.where(neg, w, 0), minlength=size)
        wp = np.bincount(message, weights=np.where(neg, 0, w), minlength=size)
        total += int(np.minimum(wn, wp).sum())
    return Fraction(total, mu.denominator)


def _signed_weights(f, mu):
    n = f.n
    wplus = np.zeros((1 << n, 1 << n), dtype=np.int64)
    wminus = np.zeros_like(wplus)
    for y in range(1 << n):
        w = mu.row(y)
        neg = _target(f, y) == -1
        wplus[y] = np.where(neg, 0, w)
        wminus[y] = np.where(neg, w, 0)
    return wplus, wminus


def best_one_bit_error(f: BoolFun, mu: PairDistribution) -> tuple[Fraction, int]:
    """Minimum optimal-Bob error over all 2^(2^n) one-bit messages; the witness is the smallest minimiser.

    The witness is returned as an int whose bit x is M(x).
    """
    check_cap("onebit", f.n, "arity n")
    wplus, wminus = _signed_weights(f, mu)
    num, M = kernels.onebit_min(wplus, wminus)
    return Fraction(int(num), mu.denominator), int(M)


def message_table(M: int, n: int) -> np.ndarray:
    return (M >> np.arange(1 << n, dtype=np.int64)) & 1


def message_correlations(f: BoolFun, mu: PairDistribution) -> tuple[np.ndarray, int]:
    """Numerators of E_y |E_{x ~ D_y}[M(x) f(x + y)]| for every +-1 message M, and the denominator.

    Row M of the message matrix has M(x) = -1 exactly where bit x of M is set.
    """
    check_cap("onebit", f.n, "arity n")
    n = f.n
    X = 1 << n
    W = mu.matrix()  # W[y, x]
    F = np.stack([_target(f, y) for y in range(X)]).astype(np.int64)  # F[y, x] = f(x + y)
    G = (W * F).T  # G[x, y]
    out = np.zeros(1 << X, dtype=np.int64)
    chunk = 1 << 14
    shifts = np.arange(X, dtype=np.int64)
    for start in range(0, 1 << X, chunk):
        Ms = np.arange(start, min(1 << X, start + chunk), dtype=np.int64)
        signs = 1 - 2 * ((Ms[:, None] >> shifts[None, :]) & 1)
        out[start : start + len(Ms)] = np.abs(signs @ G).sum(axis=1)
    return out, mu.denominator


def message_bound_check(f: BoolFun, mu: PairDistribution | None = None) -> dict:
    """Check E_y|E_{x ~ D_y}[M(x) f(x+y)]| <= (sqrt(2)/2)(1 + eps) for every M, exactly.

    Both sides are nonnegative, so the test is v^2 <= (1 + eps)^2 / 2 in rationals.
    """
    eps, _ = linear_distance(f)
    mu = mu or disagreement_distribution(f)
    nums, den = message_correlations(f, mu)
    worst = int(nums.max())
    v = Fraction(worst, den)
    return {
        "eps": eps,
        "worst_value": v,
        "worst_message": int(np.argmax(nums)),
        "bound": math.sqrt(2) / 2 * (1 + float(eps)),
        "holds": v * v <= (1 + eps) ** 2 / 2,
    }


def trivial_majority_protocol(n: int) -> OneWayProtocol:
    """Alice sends her first n-1 bits; Bob outputs the majority of the n-1 known XORs (ties -> +1)."""
    if n % 2 == 0 or n < 1:
        raise ValidationError("trivial majority protocol needs odd n")
    check_cap("comm", n, "arity n")
    c = n - 1
    mask = (1 << c) - 1
    xs = np.arange(1 << n, dtype=np.int64)
    msg = xs & mask
    pop = popcount_array(np.arange(1 << c, dtype=np.int64))
    table = np.where(2 * pop > c, -1, 1).astype(np.int8)

    def decode(y, msgs):
        return table[msgs ^ (y & mask)]

    return OneWayProtocol(n, c, msg, decoder_fn=decode)


def trivial_majority_error(n: int) -> Fraction:
    """Closed form: tie probability among n-1 fair bits, times 1/2."""
    return Fraction(math.comb(n - 1, (n - 1) // 2), 1 << n)
