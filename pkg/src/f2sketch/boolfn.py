"""Boolean functions as +-1 truth tables with exact Fourier analysis.

Table index ``x`` stores f(x) with coordinate x_1 as the least-significant
bit.  Output convention is 0 -> +1, 1 -> -1.  Spectra are the integers
c(a) = sum_x f(x) (-1)^(a.x), i.e. 2^n times the Fourier coefficient, so all
weights are exact fractions c^2 / 4^n.
"""

from __future__ import annotations

import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from ._backend import kernels
from .errors import DependentConstraintsError, ValidationError, check_cap
from .gf2 import Subspace, bits_from_str, rank
from .rng import derive_rng

_POP16 = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.int64)


def popcount_array(idx) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    out = np.zeros(idx.shape, dtype=np.int64)
    v = idx.copy()
    while np.any(v):
        out += _POP16[v & 0xFFFF]
        v >>= 16
    return out


class BoolFun:
    """f: F_2^n -> {+1, -1}, stored as an int8 table of length 2^n."""

    __slots__ = ("n", "table", "name")

    def __init__(self, n, table, name=None):
        check_cap("arity", n, "arity n")
        t = np.asarray(table, dtype=np.int8).reshape(-1)
        if t.shape[0] != 1 << n:
            raise ValidationError(f"table length {t.shape[0]} != 2^{n}")
        if not np.all((t == 1) | (t == -1)):
            raise ValidationError("table entries must be +1 or -1")
        t = t.copy()
        t.flags.writeable = False
        self.n = int(n)
        self.table = t
        self.name = name

    @classmethod
    def from_bits(cls, n, bits01, name=None):
        b = np.asarray(bits01, dtype=np.int8)
        return cls(n, 1 - 2 * b, name)

    def bits(self) -> np.ndarray:
        return ((1 - self.table) // 2).astype(np.int8)

    def __call__(self, x: int) -> int:
        return int(self.table[x])

    def __eq__(self, other):
        return isinstance(other, BoolFun) and self.n == other.n and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.n, self.table.tobytes()))

    def __repr__(self):
        return f"BoolFun(n={self.n}, name={self.name!r})"

    def minority(self) -> tuple[int, int]:
        """(value, count) of the less frequent output; ties report -1."""
        neg = int(np.count_nonzero(self.table == -1))
        pos = (1 << self.n) - neg
        return (1, pos) if pos < neg else (-1, neg)

    def to_text(self) -> str:
        return f"n={self.n}\n" + "".join(map(str, self.bits().tolist())) + "\n"


class Spectrum:
    __slots__ = ("n", "coeffs")

    def __init__(self, n, coeffs):
        c = np.asarray(coeffs, dtype=np.int64).copy()
        c.flags.writeable = False
        self.n = n
        self.coeffs = c

    def __getitem__(self, alpha) -> int:
        return int(self.coeffs[alpha])

    def coefficient(self, alpha) -> Fraction:
        return Fraction(int(self.coeffs[alpha]), 1 << self.n)

    def weight(self, alpha) -> Fraction:
        c = int(self.coeffs[alpha])
        return Fraction(c * c, 1 << (2 * self.n))

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.coeffs)

    def sum_squares(self) -> int:
        return sum(int(c) * int(c) for c in self.coeffs[self.coeffs != 0])

    def squares(self) -> np.ndarray:
        c = self.coeffs
        return c * c


def wht(f: BoolFun) -> Spectrum:
    return Spectrum(f.n, kernels.fwht(f.table.astype(np.int64)))


def inverse_wht(s: Spectrum) -> BoolFun:
    t = kernels.fwht(np.asarray(s.coeffs, dtype=np.int64))
    if np.any(t % (1 << s.n)):
        raise ValidationError("spectrum does not invert to an integer table")
    return BoolFun(s.n, t >> s.n)


def _same_arity(f, g):
    if f.n != g.n:
        raise ValidationError(f"arity mismatch: {f.n} vs {g.n}")


def shift(f: BoolFun, z: int) -> BoolFun:
    """x -> f(x + z)."""
    idx = np.arange(1 << f.n, dtype=np.int64) ^ int(z)
    return BoolFun(f.n, f.table[idx])


class Convolution:
    """(f*g)(x) = E_y[f(y) g(x+y)], held as integer numerators over 2^n."""

    __slots__ = ("n", "num")

    def __init__(self, n, num):
        self.n = n
        self.num = np.asarray(num, dtype=np.int64)

    def value(self, x) -> Fraction:
        return Fraction(int(self.num[x]), 1 << self.n)

    def values(self) -> list[Fraction]:
        return [Fraction(int(v), 1 << self.n) for v in self.num]

    def spectrum_numerators(self) -> np.ndarray:
        """WHT of the numerators; equals c_f * c_g entrywise."""
        return kernels.fwht(self.num)

    def coefficient(self, alpha) -> Fraction:
        return Fraction(int(self.spectrum_numerators()[alpha]), 1 << (2 * self.n))


def convolve(f: BoolFun, g: BoolFun) -> Convolution:
    _same_arity(f, g)
    prod = wht(f).coeffs * wht(g).coeffs
    num = kernels.fwht(prod)
    # sum_S c_f c_g chi_S(x) = 4^n (f*g)(x); the stored numerator is 2^n (f*g)(x)
    return Convolution(f.n, num // (1 << f.n))


def compose(f: BoolFun, g: BoolFun) -> BoolFun:
    """(f o g)(x) = f(g(x_block1), ..., g(x_blockn)); block i holds coordinates i*m .. i*m+m-1."""
    n, m = f.n, g.n
    check_cap("arity", n * m, "arity n*m")
    idx = np.arange(1 << (n * m), dtype=np.int64)
    gb = g.bits().astype(np.int64)
    inner = np.zeros_like(idx)
    mask = (1 << m) - 1
    for i in range(n):
        inner |= gb[(idx >> (i * m)) & mask] << i
    return BoolFun(n * m, f.table[inner])


def _solve_constraints(n, S, b):
    """RREF of the augmented system S_i . x = b_i; the right-hand side sits at bit n."""
    aug = [int(s) | (int(bi) << n) for s, bi in zip(S, b)]
    return Subspace(n + 1, tuple(aug)).basis


def restrict_coset(f: BoolFun, S, b):
    """Restrict f to {x : S_i . x = b_i}.

    The restriction is indexed by the free (non-pivot) coordinates in
    increasing order.  Returns ``(g, constant)`` where ``constant`` is the
    empty-set coefficient of g, computed from the spectrum of f and checked
    against the direct average.
    """
    n = f.n
    S = [int(s) for s in S]
    b = [int(x) & 1 for x in b]
    if len(S) != len(b):
        raise ValidationError("S and b differ in length")
    if len(S) > n:
        raise DependentConstraintsError("more constraints than coordinates")
    if S and rank(S) != len(S):
        raise DependentConstraintsError("constraint vectors are linearly dependent")
    d = len(S)
    red = _solve_constraints(n, S, b)
    piv = [(r & -r).bit_length() - 1 for r in red]
    free = [j for j in range(n) if j not in piv]
    u = np.arange(1 << (n - d), dtype=np.int64)
    x = np.zeros_like(u)
    for t, j in enumerate(free):
        x |= ((u >> t) & 1) << j
    for r, p in zip(red, piv):
        rhs = (r >> n) & 1
        body = r & ((1 << n) - 1) & ~(1 << p)
        val = np.full(u.shape, rhs, dtype=np.int64)
        for j in range(n):
            if (body >> j) & 1:
                val ^= (x >> j) & 1
        x |= val << p
    g = BoolFun(n - d, f.table[x])

    spec = wht(f)
    total = 0
    for z in range(1 << d):
        a, sgn = 0, 0
        for i in range(d):
            if (z >> i) & 1:
                a ^= S[i]
                sgn ^= b[i]
        total += -spec[a] if sgn else spec[a]
    formula = Fraction(total, 1 << n)
    direct = Fraction(int(g.table.astype(np.int64).sum()), 1 << (n - d))
    if formula != direct:  # pragma: no cover - would indicate a bug
        raise AssertionError(f"restriction constant mismatch: {formula} vs {direct}")
    return g, direct


# builtins --------------------------------------------------------------------


def _table_from_predicate(n, pred):
    check_cap("arity", n, "arity n")
    x = np.arange(1 << n, dtype=np.int64)
    return BoolFun.from_bits(n, pred(x).astype(np.int8))


def parity_fn(n):
    return _table_from_predicate(n, lambda x: popcount_array(x) & 1)


def and_fn(n):
    return _table_from_predicate(n, lambda x: x == (1 << n) - 1)


def or_fn(n):
    return _table_from_predicate(n, lambda x: x != 0)


def maj_fn(n):
    """-1 iff more than half the bits are 1; ties give +1."""
    return _table_from_predicate(n, lambda x: 2 * popcount_array(x) > n)


def hamge_fn(n, k):
    return _table_from_predicate(n, lambda x: popcount_array(x) >= k)


def chi_fn(n, alpha):
    return _table_from_predicate(n, lambda x: popcount_array(x & alpha) & 1)


def maj3k_fn(k):
    if k < 1:
        raise ValidationError("maj3k needs k >= 1")
    check_cap("arity", 3**k, "arity 3^k")
    f = maj_fn(3)
    for _ in range(k - 1):
        f = compose(maj_fn(3), f)
    return f


def addr_fn(n):
    """Address bits first (LSB-first), then y_1..y_n; outputs y at 1-based index address+1."""
    if n < 1 or n & (n - 1):
        raise ValidationError("addr:n needs n a power of two")
    a = n.bit_length() - 1
    check_cap("arity", n + a, "arity n + log n")
    return _table_from_predicate(n + a, lambda x: (x >> (a + (x & (n - 1)))) & 1)


def ip_fn(n):
    if n % 2:
        raise ValidationError("ip:n needs n even")

    def pred(x):
        acc = np.zeros_like(x)
        for i in range(0, n, 2):
            acc ^= ((x >> i) & 1) & ((x >> (i + 1)) & 1)
        return acc

    return _table_from_predicate(n, pred)


def random_fn(n, bias, seed):
    """Each entry is -1 independently with probability ``bias``."""
    check_cap("arity", n, "arity n")
    rng = derive_rng(seed, "random-fn", n)
    return BoolFun.from_bits(n, (rng.random(1 << n) < float(bias)).astype(np.int8))


def ltf_fn(weights, theta):
    """-1 iff sum_i w_i x_i >= theta (exact rational arithmetic)."""
    n = len(weights)
    check_cap("arity", n, "arity n")
    ws = [Fraction(w) for w in weights]
    den = math.lcm(*(w.denominator for w in ws + [Fraction(theta)]))
    iw = np.array([int(w * den) for w in ws], dtype=object)
    ith = int(Fraction(theta) * den)
    if n > 0 and max(abs(int(v)) for v in iw) * n < 2**62 and abs(ith) < 2**62:
        iw = iw.astype(np.int64)
    x = np.arange(1 << n, dtype=np.int64)
    acc = np.zeros(x.shape, dtype=iw.dtype if n else np.int64)
    for i in range(n):
        acc = acc + ((x >> i) & 1) * iw[i]
    return BoolFun.from_bits(n, (acc >= ith).astype(np.int8))


def read_truth_table(text: str) -> BoolFun:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("n="):
        raise ValidationError("expected 'n=<int>'", line=1)
    try:
        n = int(lines[0][2:])
    except ValueError:
        raise ValidationError("expected 'n=<int>'", line=1) from None
    check_cap("arity", n, "arity n")
    if len(lines) < 2:
        raise ValidationError("missing table line", line=2)
    body = lines[1]
    if len(body) != 1 << n or set(body) - {"0", "1"}:
        raise ValidationError(f"table must be {1 << n} chars of 0/1", line=2)
    return BoolFun.from_bits(n, np.frombuffer(body.encode(), dtype=np.uint8) - 48)


def read_ltf(text: str):
    """Parse an LTF weight file into (weights, theta) as Fractions."""
    lines = [ln.strip() for ln in text.splitlines()]
    if not lines or not lines[0].startswith("theta="):
        raise ValidationError("expected 'theta=<decimal>'", line=1)
    try:
        theta = Fraction(lines[0][6:])
    except ValueError:
        raise ValidationError("bad theta", line=1) from None
    weights = []
    for i, ln in enumerate(lines[1:], start=2):
        if not ln:
            continue
        try:
            weights.append(Fraction(ln))
        except ValueError:
            raise ValidationError(f"bad weight {ln!r}", line=i) from None
    if not weights:
        raise ValidationError("no weights", line=2)
    return weights, theta


def _ints(parts, count, spec):
    if len(parts) != count:
        raise ValidationError(f"{spec!r}: expected {count} integer argument(s)")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise ValidationError(f"{spec!r}: arguments must be integers") from None
    if any(v < 0 for v in vals):
        raise ValidationError(f"{spec!r}: arguments must be nonnegative")
    return vals


def builtin(spec: str) -> BoolFun:
    """Resolve a function spec string.

    Builtins: parity:n, and:n, or:n, maj:n, maj3k:k, addr:n, ip:n, hamge:n:k,
    chi:<bits>[:i,j,...] (character, optionally with table entries flipped),
    const:n[:+1|-1], random:n:bias:seed.  Anything else is read as a file:
    ``tt:path`` / ``ltf:path`` force the format, otherwise the first line
    decides (``n=`` truth table, ``theta=`` LTF weights).
    """
    spec = spec.strip()
    name, _, rest = spec.partition(":")
    parts = rest.split(":") if rest else []
    if name == "parity":
        (n,) = _ints(parts, 1, spec)
        f = parity_fn(n)
    elif name == "and":
        (n,) = _ints(parts, 1, spec)
        f = and_fn(n)
    elif name == "or":
        (n,) = _ints(parts, 1, spec)
        f = or_fn(n)
    elif name == "maj":
        (n,) = _ints(parts, 1, spec)
        f = maj_fn(n)
    elif name == "maj3k":
        (k,) = _ints(parts, 1, spec)
        f = maj3k_fn(k)
    elif name == "addr":
        (n,) = _ints(parts, 1, spec)
        f = addr_fn(n)
    elif name == "ip":
        (n,) = _ints(parts, 1, spec)
        f = ip_fn(n)
    elif name == "hamge":
        n, k = _ints(parts, 2, spec)
        f = hamge_fn(n, k)
    elif name == "chi":
        if not parts or len(parts) > 2:
            raise ValidationError(f"{spec!r}: expected chi:<bits>[:flips]")
        n = len(parts[0])
        f = chi_fn(n, bits_from_str(parts[0]))
        if len(parts) == 2 and parts[1]:
            t = f.table.copy()
            for tok in parts[1].split(","):
                try:
                    i = int(tok)
                except ValueError:
                    raise ValidationError(f"{spec!r}: bad flip index {tok!r}") from None
                if not 0 <= i < 1 << n:
                    raise ValidationError(f"flip index {i} out of range")
                t[i] = -t[i]
            f = BoolFun(n, t)
    elif name == "const":
        if not 1 <= len(parts) <= 2:
            raise ValidationError(f"{spec!r}: expected const:n[:+1|-1]")
        try:
            n = int(parts[0])
            v = int(parts[1]) if len(parts) == 2 else 1
        except ValueError:
            raise ValidationError(f"{spec!r}: bad arguments") from None
        if n < 0:
            raise ValidationError(f"{spec!r}: arity must be nonnegative")
        if v not in (1, -1):
            raise ValidationError("constant must be +1 or -1")
        check_cap("arity", n, "arity n")
        f = BoolFun(n, np.full(1 << n, v, dtype=np.int8))
    elif name == "random":
        if len(parts) != 3:
            raise ValidationError(f"{spec!r}: expected random:n:bias:seed")
        try:
            n, bias, seed = int(parts[0]), float(Fraction(parts[1])), int(parts[2])
        except ValueError:
            raise ValidationError(f"{spec!r}: bad arguments") from None
        if not 0 <= bias <= 1:
            raise ValidationError("bias must lie in [0, 1]")
        f = random_fn(n, bias, seed)
    else:
        return _from_file(spec)
    f.name = spec
    return f


def _from_file(spec):
    kind = None
    path = spec
    if spec.startswith(("tt:", "ltf:")):
        kind, _, path = spec.partition(":")
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"unknown function spec {spec!r}")
    text = p.read_text()
    if kind is None:
        kind = "ltf" if text.lstrip().startswith("theta=") else "tt"
    if kind == "ltf":
        w, theta = read_ltf(text)
        f = ltf_fn(w, theta)
    else:
        f = read_truth_table(text)
    f.name = spec
    return f


# symmetric structure ---------------------------------------------------------


def symmetric_profile(f: BoolFun) -> list[Fraction]:
    """w_k = total squared Fourier weight on sets of size k, for k = 0..n."""
    sq = wht(f).squares()
    k = popcount_array(np.arange(1 << f.n))
    den = 1 << (2 * f.n)
    out = []
    for j in range(f.n + 1):
        out.append(Fraction(int(sq[k == j].sum()), den))
    return out


def is_symmetric(f: BoolFun) -> bool:
    k = popcount_array(np.arange(1 << f.n))
    for j in range(f.n + 1):
        vals = f.table[k == j]
        if vals.size and np.any(vals != vals[0]):
            return False
    return True


def linear_distance(f: BoolFun) -> tuple[Fraction, int]:
    """(eps, S) with 1 - eps the best agreement of f with a character chi_S."""
    c = wht(f).coeffs
    s = int(np.argmax(c))
    return Fraction((1 << f.n) - int(c[s]), 1 << (f.n + 1)), s
