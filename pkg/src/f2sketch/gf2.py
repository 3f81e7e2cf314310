"""Bit-packed linear algebra over GF(2).

A vector of F_2^n is a plain Python ``int``: bit ``i`` holds coordinate
``x_{i+1}``.  The dimension travels with the containers (``Gf2Matrix.n``,
``Subspace.n``) rather than with every vector.

Row echelon convention: the pivot of a row is its lowest set bit (the
leftmost coordinate in text form), rows are sorted by pivot and every pivot
column is cleared in all other rows.  Two subspaces are equal iff their RREF
bases are identical.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from ._fallback import free_slots
from .errors import CAPS, CapExceededError, ValidationError, check_cap

MAX_BITS = 64


def popcount(v: int) -> int:
    return v.bit_count()


def parity(v: int) -> int:
    return v.bit_count() & 1


def dot(u: int, v: int) -> int:
    return (u & v).bit_count() & 1


def bits_from_str(s: str) -> int:
    s = s.strip()
    if not s or set(s) - {"0", "1"}:
        raise ValidationError(f"not a bit string: {s!r}")
    v = 0
    for i, ch in enumerate(s):
        if ch == "1":
            v |= 1 << i
    return v


def bits_to_str(v: int, n: int) -> str:
    return "".join("1" if (v >> i) & 1 else "0" for i in range(n))


def support(v: int) -> list[int]:
    out = []
    while v:
        low = v & -v
        out.append(low.bit_length() - 1)
        v ^= low
    return out


def _check_n(n):
    if not 0 <= n <= MAX_BITS:
        raise CapExceededError(f"dimension n={n} outside [0, {MAX_BITS}]")


def _rref(rows):
    """Reduced row echelon form of an iterable of ints; zero rows dropped."""
    basis: dict[int, int] = {}  # pivot bit -> row
    for v in rows:
        v = int(v)
        for low, r in basis.items():
            if v & low:
                v ^= r
        if not v:
            continue
        low = v & -v
        for p in list(basis):
            if basis[p] & low:
                basis[p] ^= v
        basis[low] = v
    return [basis[p] for p in sorted(basis)]


@dataclass(frozen=True)
class Gf2Matrix:
    """An r x n matrix over GF(2), one int per row."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        _check_n(self.n)
        rows = tuple(int(r) for r in self.rows)
        mask = ~((1 << self.n) - 1)
        if any(r & mask or r < 0 for r in rows):
            raise ValidationError(f"row wider than n={self.n}")
        object.__setattr__(self, "rows", rows)

    @property
    def r(self) -> int:
        return len(self.rows)

    @classmethod
    def from_strings(cls, strings):
        strings = list(strings)
        if not strings:
            raise ValidationError("empty matrix needs an explicit n")
        n = len(strings[0].strip())
        if any(len(s.strip()) != n for s in strings):
            raise ValidationError("ragged rows")
        return cls(n, tuple(bits_from_str(s) for s in strings))

    def entry(self, i: int, j: int) -> int:
        return (self.rows[i] >> j) & 1

    def mul(self, x: int) -> int:
        """Matrix-vector product; bit i of the result is row i dotted with x."""
        out = 0
        for i, r in enumerate(self.rows):
            out |= dot(r, x) << i
        return out

    def to_text(self) -> str:
        lines = [f"n={self.n} r={self.r}"]
        lines += [bits_to_str(r, self.n) for r in self.rows]
        return "\n".join(lines) + "\n"


def read_matrix(text: str) -> Gf2Matrix:
    lines = [ln.strip() for ln in text.splitlines()]
    if not lines or not lines[0]:
        raise ValidationError("missing header", line=1)
    head = dict(tok.split("=", 1) for tok in lines[0].split() if "=" in tok)
    try:
        n, r = int(head["n"]), int(head["r"])
    except (KeyError, ValueError):
        raise ValidationError("header must be 'n=<int> r=<int>'", line=1) from None
    body = [ln for ln in lines[1:] if ln]
    if len(body) != r:
        raise ValidationError(f"expected {r} rows, found {len(body)}", line=len(lines))
    rows = []
    for i, ln in enumerate(body, start=2):
        if len(ln) != n or set(ln) - {"0", "1"}:
            raise ValidationError(f"row must be {n} chars of 0/1", line=i)
        rows.append(bits_from_str(ln))
    return Gf2Matrix(n, tuple(rows))


def rref_rank(M: Gf2Matrix) -> tuple[Gf2Matrix, int]:
    """RREF of M (zero rows kept at the bottom so the shape is unchanged) and its rank."""
    red = _rref(M.rows)
    rank = len(red)
    return Gf2Matrix(M.n, tuple(red) + (0,) * (M.r - rank)), rank


def rank(rows) -> int:
    rows = [int(r) for r in rows]
    if rows and max(rows).bit_length() <= 64:
        return kernels.gf2_rank(rows)
    return len(_rref(rows))


@dataclass(frozen=True)
class Subspace:
    """Linear subspace of F_2^n held as its canonical RREF basis."""

    n: int
    basis: tuple[int, ...]

    def __post_init__(self):
        _check_n(self.n)
        red = tuple(_rref(self.basis))
        if any(v >> self.n for v in red):
            raise ValidationError(f"basis vector wider than n={self.n}")
        object.__setattr__(self, "basis", red)

    @classmethod
    def span(cls, vectors, n: int) -> "Subspace":
        return cls(n, tuple(int(v) for v in vectors))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, ())

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, tuple(1 << i for i in range(n)))

    @classmethod
    def standard(cls, coords, n: int) -> "Subspace":
        """Span of unit vectors; ``coords`` are 0-based bit positions."""
        return cls(n, tuple(1 << int(c) for c in coords))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple((v & -v).bit_length() - 1 for v in self.basis)

    def matrix(self) -> Gf2Matrix:
        return Gf2Matrix(self.n, self.basis)

    def reduce(self, v: int) -> int:
        """Canonical representative of the coset v + self."""
        for b in self.basis:
            if v & (b & -b):
                v ^= b
        return v

    def __contains__(self, v) -> bool:
        return self.reduce(int(v)) == 0

    def elements(self):
        """All 2^dim members, Gray-code order starting at 0."""
        cur = 0
        yield 0
        for g in range(1, 1 << self.dim):
            cur ^= self.basis[(g & -g).bit_length() - 1]
            yield cur

    def elements_array(self) -> np.ndarray:
        out = np.zeros(1, dtype=np.int64)
        for b in self.basis:
            out = np.concatenate([out, out ^ b])
        return out

    def is_standard(self) -> bool:
        return all(popcount(b) == 1 for b in self.basis)

    def issubspace(self, other: "Subspace") -> bool:
        return all(b in other for b in self.basis)

    def join(self, other: "Subspace") -> "Subspace":
        return Subspace(self.n, self.basis + other.basis)

    def __str__(self):
        inner = ", ".join(bits_to_str(b, self.n) for b in self.basis)
        return f"span{{{inner}}}"


@dataclass(frozen=True)
class AffineSubspace:
    """The coset ``shift + sub``; the stored shift is the canonical representative."""

    sub: Subspace
    shift: int

    def __post_init__(self):
        object.__setattr__(self, "shift", self.sub.reduce(int(self.shift)))

    @property
    def dim(self) -> int:
        return self.sub.dim

    def __contains__(self, v) -> bool:
        return self.sub.reduce(int(v) ^ self.shift) == 0

    def elements(self):
        for h in self.sub.elements():
            yield h ^ self.shift

    def __str__(self):
        return f"{bits_to_str(self.shift, self.sub.n)} + {self.sub}"


def orthogonal_complement(S: Subspace) -> Subspace:
    """{y : y . s = 0 for every s in S}."""
    piv = S.pivots
    free = [j for j in range(S.n) if j not in piv]
    out = []
    for j in free:
        v = 1 << j
        for b, p in zip(S.basis, piv):
            if (b >> j) & 1:
                v |= 1 << p
        out.append(v)
    return Subspace(S.n, tuple(out))


def nullspace(M: Gf2Matrix) -> Subspace:
    """{x : Mx = 0}."""
    return orthogonal_complement(Subspace(M.n, M.rows))


def rref_from_assignment(D: int, piv, a: int) -> tuple[int, ...]:
    """RREF rows with pivot columns ``piv`` and free entries given by the bits of ``a``.

    This fixes the canonical enumeration order shared with the compiled kernel.
    """
    rows = [1 << int(p) for p in piv]
    for t, (i, q) in enumerate(free_slots(D, piv)):
        if (a >> t) & 1:
            rows[i] |= 1 << q
    return tuple(rows)


def gaussian_binomial(n: int, d: int) -> int:
    if d < 0 or d > n:
        return 0
    num = den = 1
    for i in range(d):
        num *= (1 << (n - i)) - 1
        den *= (1 << (i + 1)) - 1
    return num // den


def enumerate_subspaces(n: int, d: int, cap: int | None = None):
    """Yield every d-dimensional subspace of F_2^n once, in canonical order.

    Pivot sets are visited lexicographically; within a pivot set the free
    entries count upward as a binary number.
    """
    limit = CAPS["enum"] if cap is None else cap
    if not 0 <= d <= n:
        raise ValidationError(f"subspace dimension d={d} out of range for n={n}")
    if n > limit:
        raise CapExceededError(f"subspace enumeration needs n <= {limit}, got {n}")
    for piv in itertools.combinations(range(n), d):
        F = len(free_slots(n, piv))
        for a in range(1 << F):
            yield Subspace(n, rref_from_assignment(n, piv, a))


def odd_set(L: Subspace) -> frozenset[int]:
    check_cap("odd_set", L.dim, "dim(L)")
    return frozenset(v for v in L.elements() if parity(v))


def set_dominates(S1, S2) -> tuple[bool, list[tuple[int, int]]]:
    """Does S1 dominate S2?  Each v2 in S2 needs its own v1 with support(v1) within support(v2).

    Maximum bipartite matching by augmenting paths.  Returns the matching as
    (v1, v2) pairs when it saturates S2, else ``(False, [])``.
    """
    left = sorted(set(int(v) for v in S2))
    right = sorted(set(int(v) for v in S1))
    adj = {v2: [v1 for v1 in right if v1 & ~v2 == 0] for v2 in left}
    owner: dict[int, int] = {}

    def augment(v2, seen):
        for v1 in adj[v2]:
            if v1 in seen:
                continue
            seen.add(v1)
            if v1 not in owner or augment(owner[v1], seen):
                owner[v1] = v2
                return True
        return False

    for v2 in left:
        if not augment(v2, set()):
            return False, []
    return True, sorted((v1, v2) for v1, v2 in owner.items())


def standard_domination_decompose(L: Subspace):
    """Three standard subspaces whose odd sets jointly dominate the odd set of L.

    Returns ``(S1, S2, S3, matching)`` where ``matching`` pairs every odd x in L
    with a distinct odd vector of S1 u S2 u S3 whose support lies inside x's.
    Follows the three-case construction: normalise the basis so every row is
    odd, then split odd combinations by whether they use the first row and by
    the parities of the other two row groups.  Coordinates are the original
    ones throughout (pivot columns play the role of the leading identity block).
    """
    n, d = L.n, L.dim
    if d == 0:
        raise ValidationError("domination decomposition needs dim(L) >= 1")
    rows = list(L.basis)
    piv = list(L.pivots)
    odd_idx = [i for i in range(d) if parity(rows[i])]
    zero = Subspace.zero(n)
    if not odd_idx:
        return zero, zero, zero, []

    first = odd_idx[0]
    a_idx = odd_idx[1:]
    b_idx = [i for i in range(d) if not parity(rows[i])]
    v = rows[first]
    A = [rows[i] for i in a_idx]
    B = [rows[i] ^ v for i in b_idx]  # now odd, and 1 on v's pivot
    p1 = 1 << piv[first]
    pA = [1 << piv[i] for i in a_idx]
    pB = [1 << piv[i] for i in b_idx]
    pivot_mask = p1 | sum(pA) | sum(pB)

    # S1: pivots of rows 2..d; S2: all d pivots; S3: pivots plus a rank basis of the tail.
    S1 = Subspace(n, tuple(pA + pB))
    S2 = Subspace(n, tuple([p1] + pA + pB))
    tail = _rref(r & ~pivot_mask for r in [v] + A + B)
    tail_piv = [t & -t for t in tail]
    S3 = Subspace(n, tuple([p1] + pA + pB + tail_piv))

    matching = []
    all_rows = [v] + A + B
    groups = [0] + [1] * len(A) + [2] * len(B)
    for size in range(1, d + 1, 2):
        for combo in itertools.combinations(range(d), size):
            x = 0
            for i in combo:
                x ^= all_rows[i]
            if 0 not in combo:
                img = x & (sum(pA) | sum(pB))
            else:
                na = sum(1 for i in combo if groups[i] == 1)
                if na % 2 == 0:
                    img = x & pivot_mask
                else:
                    hit = next(t for t in tail_piv if x & t)
                    img = (x & pivot_mask) | hit
            matching.append((x, img))
    return S1, S2, S3, matching


def super_slam(A: Gf2Matrix, B: Gf2Matrix) -> Gf2Matrix:
    """Block construction: row (i, j) with j in [b]^n is (A_i1 B_j1, ..., A_in B_jn).

    Block l occupies coordinates l*m .. l*m + m - 1, matching ``compose``.
    """
    a, n = A.r, A.n
    b, m = B.r, B.n
    size = a * b**n * n * m
    if size > CAPS["slam"]:
        raise CapExceededError(f"super-slam size {size} exceeds cap {CAPS['slam']}")
    if n * m > MAX_BITS:
        raise CapExceededError(f"super-slam width n*m={n * m} exceeds {MAX_BITS}")
    shifted = [[B.rows[k] << (l * m) for k in range(b)] for l in range(n)]
    out = []
    for i in range(a):
        cols = [l for l in range(n) if (A.rows[i] >> l) & 1]
        for j in itertools.product(range(b), repeat=n):
            row = 0
            for l in cols:
                row |= shifted[l][j[l]]
            out.append(row)
    return Gf2Matrix(n * m, tuple(out))
