"""Exact and approximate Fourier dimension.

w_d is the largest squared-spectrum weight carried by a subspace of dimension
at most d.  The exhaustive search runs inside the span of the spectral
support: weight outside it is zero and any subspace found there extends to
dimension d in F_2^n, so nothing is lost.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._backend import kernels
from .boolfn import BoolFun, popcount_array, wht
from .errors import CAPS, CapExceededError, ValidationError, check_cap
from .gf2 import (
    AffineSubspace,
    Subspace,
    enumerate_subspaces,
    gaussian_binomial,
    orthogonal_complement,
    rref_from_assignment,
)


def spectral_span(f: BoolFun) -> Subspace:
    return Subspace(f.n, tuple(int(a) for a in wht(f).support()))


def exact_dim(f: BoolFun) -> tuple[int, Subspace]:
    S = spectral_span(f)
    return S.dim, S


def _coords_in_span(basis, D):
    """Map u in F_2^D to sum_j u_j b_j for all u (int64 array of length 2^D)."""
    out = np.zeros(1, dtype=np.int64)
    for b in basis:
        out = np.concatenate([out, out ^ b])
    return out


def _pivot_table(D, d):
    combos = list(itertools.combinations(range(D), d))
    piv = np.zeros((len(combos), d), dtype=np.int64)
    for i, c in enumerate(combos):
        piv[i, :] = c
    return piv


def _search_chunk(args):
    W, D, piv = args
    return kernels.best_subspace(W, D, piv)


def _best_in_span(W, D, d, workers=1):
    """(best numerator, pivots, assignment) over d-dim subspaces of F_2^D, canonical tie-break."""
    piv = _pivot_table(D, d)
    if workers <= 1 or piv.shape[0] < 2 * workers:
        best, idx, a = kernels.best_subspace(W, D, piv)
        return best, tuple(int(p) for p in piv[idx]), a
    bounds = np.linspace(0, piv.shape[0], workers + 1).astype(int)
    parts = [piv[bounds[i] : bounds[i + 1]] for i in range(workers) if bounds[i] < bounds[i + 1]]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        results = list(ex.map(_search_chunk, [(W, D, p) for p in parts]))
    best, choice = -1, None
    for part, (val, idx, a) in zip(parts, results):
        if val > best:  # parts are in canonical order, so strict > keeps the first
            best, choice = val, (tuple(int(p) for p in part[idx]), a)
    return best, choice[0], choice[1]


def max_subspace_weight(f: BoolFun, d: int, workers: int = 1, spectrum=None) -> tuple[Fraction, Subspace]:
    """Exact w_d and a witness subspace (dimension min(d, dim f), canonical first maximiser)."""
    n = f.n
    if not 0 <= d <= n:
        raise ValidationError(f"d={d} out of range [0, {n}]")
    spec = wht(f) if spectrum is None else spectrum
    span = Subspace(n, tuple(int(a) for a in spec.support()))
    D = span.dim
    den = 1 << (2 * n)
    if d >= D:
        return Fraction(spec.sum_squares(), den), span
    if D > CAPS["enum"]:
        raise CapExceededError(
            f"spectral span has dimension {D} > {CAPS['enum']}; use greedy_subspace for a lower bound"
        )
    elems = _coords_in_span(span.basis, D)
    sq = spec.squares()
    W = sq[elems]
    best, piv, a = _best_in_span(W, D, d, workers)
    rows = rref_from_assignment(D, piv, a)
    vecs = []
    for r in rows:
        v = 0
        for j in range(D):
            if (r >> j) & 1:
                v ^= span.basis[j]
        vecs.append(v)
    return Fraction(best, den), Subspace(n, tuple(vecs))


def subspace_weight(f: BoolFun, A: Subspace, spectrum=None) -> Fraction:
    spec = wht(f) if spectrum is None else spectrum
    total = kernels.span_sum(spec.squares(), list(A.basis))
    return Fraction(int(total), 1 << (2 * f.n))


@dataclass
class DimProfile:
    n: int
    w: list
    witnesses: list
    gaps: list = field(default_factory=list)
    undefined: list = field(default_factory=list)
    best_gap_d: int = 0

    def to_dict(self):
        return {
            "n": self.n,
            "w": [str(x) for x in self.w],
            "gaps": [str(x) for x in self.gaps],
            "undefined": self.undefined,
            "best_gap_d": self.best_gap_d,
            "witnesses": [[int(b) for b in s.basis] for s in self.witnesses],
        }


def dim_profile(f: BoolFun, workers: int = 1, dmax: int | None = None) -> DimProfile:
    """w_0..w_n, gaps Delta_d = w_d - w_{d-1}, and the d with the largest gap.

    A zero gap means no eps has approximate dimension exactly d; such d are
    listed in ``undefined``.
    """
    spec = wht(f)
    top = f.n if dmax is None else dmax
    w, wit = [], []
    for d in range(top + 1):
        val, A = max_subspace_weight(f, d, workers, spectrum=spec)
        w.append(val)
        wit.append(A)
    gaps = [w[d] - w[d - 1] for d in range(1, top + 1)]
    undefined = [d for d in range(1, top + 1) if gaps[d - 1] == 0]
    best = 1 + max(range(len(gaps)), key=lambda i: (gaps[i], -i)) if gaps else 0
    return DimProfile(f.n, w, wit, gaps, undefined, best)


def greedy_subspace(f: BoolFun, d: int) -> tuple[Fraction, Subspace]:
    """Lower bound on w_d: repeatedly add the support vector with the largest marginal gain."""
    if not 0 <= d <= f.n:
        raise ValidationError(f"d={d} out of range [0, {f.n}]")
    spec = wht(f)
    sq = spec.squares()
    supp = [int(a) for a in spec.support()]
    A = Subspace.zero(f.n)
    cur = int(sq[0])
    for _ in range(d):
        best, pick = cur, None
        for a in supp:
            if a in A:
                continue
            B = Subspace(f.n, A.basis + (a,))
            val = int(kernels.span_sum(sq, list(B.basis)))
            if val > best:
                best, pick = val, B
        if pick is None:
            break
        A, cur = pick, best
    return Fraction(cur, 1 << (2 * f.n)), A


# error bounds ----------------------------------------------------------------



def bound_report(f: BoolFun, profile: DimProfile | None = None) -> dict:
    """Per-d sketch bounds derived from the profile.

    sketch_error_max: a d-bit deterministic sketch with uniform error <= (1 - w_d)/2.
    sketch_error_min: every d-bit sketch has uniform error >= (1 - sqrt(w_d))/2.
    oneway_error_floor: one-way uniform error below Delta_d/4 needs at least d bits.
    """
    prof = profile or dim_profile(f)
    n = prof.n
    rows = []
    for d in range(len(prof.w)):
        w = prof.w[d]
        gap = prof.w[d] - prof.w[d - 1] if d else prof.w[0]
        sqrt_w = math.sqrt(w)
        rows.append(
            {
                "d": d,
                "w_d": str(w),
                "gap": str(gap),
                "undefined": d in prof.undefined,
                "bounds": {
                    "sketch_error_max": str((1 - w) / 2),
                    "sketch_error_min": (1 - sqrt_w) / 2,
                    "oneway_error_floor": str(gap / 4) if d else None,
                },
            }
        )
    corollaries = {
        "gap_choice": gap_choice(prof),
        "from_theta": [
            {
                "d": d,
                "theta": str(prof.w[d - 1]),
                "delta": str((1 - prof.w[d - 1]) / (4 * (n - d))),
                "statement": f"one-way uniform error below (1-theta)/(4(n-d)) needs >= {d} bits, theta = w_{d - 1}",
            }
            for d in range(1, n)
        ],
    }
    return {"n": n, "fn": f.name, "per_d": rows, "corollaries": corollaries}


def gap_choice(prof: DimProfile) -> dict:
    """Pick d from the largest gap, or by averaging when every gap is small.

    theta is w_0.  The one-way error level is an exact expression in n; its
    order is Theta(1/n) with constants depending on theta.
    """
    n, w = prof.n, prof.w
    theta = w[0]
    if theta >= 1 or n == 0:
        return {"case": "constant", "d": 0}
    dstar = prof.best_gap_d
    gap = prof.gaps[dstar - 1]
    if gap >= (1 - theta) / 3:
        return {
            "case": 1,
            "theta": str(theta),
            "d": dstar,
            "gap": str(gap),
            "oneway_delta": str(gap / 4),
            "oneway_delta_formula": str((1 - theta) / (12 * n)),
            "sketch_error": str((1 - w[dstar]) / 2),
        }
    t1 = theta + (1 - theta) / 3
    t2 = theta + 2 * (1 - theta) / 3
    d1 = next(d for d in range(1, n + 1) if w[d] >= t1)
    d2 = max(range(d1 + 1, n + 1), key=lambda d: (w[d] - w[d - 1], -d))
    return {
        "case": 2,
        "theta": str(theta),
        "d1": d1,
        "d": d2,
        "gap": str(w[d2] - w[d2 - 1]),
        "oneway_delta": str((w[d2] - w[d2 - 1]) / 4),
        "oneway_delta_formula": str((1 - t2) / (4 * n)),
        "sketch_error": str((1 - w[d2]) / 2),
    }


def smallest_d_for_error(profile: DimProfile, err: Fraction) -> int:
    """Smallest d whose part-1 bound (1 - w_d)/2 is at most err."""
    for d, w in enumerate(profile.w):
        if (1 - w) / 2 <= err:
            return d
    return profile.n


# hamming-slice intersections -------------------------------------------------


def hamming_intersection_check(A: Subspace, k: int) -> tuple[Fraction, float, bool]:
    n, d = A.n, A.dim
    if 2 * d > n:
        raise ValidationError(f"dim(A)={d} exceeds n/2={n / 2}")
    if not 1 <= k <= n - 1:
        raise ValidationError(f"k={k} outside [1, n-1]")
    check_cap("odd_set", d, "dim(A)")
    elems = A.elements_array()
    hits = int(np.count_nonzero(popcount_array(elems) == k))
    ratio = Fraction(hits, math.comb(n, k))
    bound = (math.e * d / n) ** min(k, n - k, d)
    return ratio, bound, float(ratio) <= bound


# affine dispersers and extractors --------------------------------------------


@dataclass
class AffineReport:
    n: int
    d: int
    delta: Fraction
    disperser: bool
    extractor: bool
    worst_bias: Fraction  # smallest min-side frequency seen
    worst_coset: AffineSubspace | None
    constant_witness: AffineSubspace | None
    coverage: str
    lower_bound: int

    def to_dict(self):
        return {
            "n": self.n,
            "d": self.d,
            "delta": str(self.delta),
            "disperser": self.disperser,
            "extractor": self.extractor,
            "worst_min_side": str(self.worst_bias),
            "worst_coset": str(self.worst_coset) if self.worst_coset else None,
            "constant_witness": str(self.constant_witness) if self.constant_witness else None,
            "coverage": self.coverage,
            "sketch_lower_bound": self.lower_bound,
        }


def _coset_scan(bits01, n, C: Subspace):
    """Min-side counts of f on every coset of H = C^perp, H indexed by the value of Cx."""
    # label x by its syndrome (c_i . x)_i; cosets of H are the syndrome classes
    x = np.arange(1 << n, dtype=np.int64)
    syn = np.zeros_like(x)
    for i, c in enumerate(C.basis):
        syn |= (popcount_array(x & c) & 1) << i
    r = C.dim
    ones = np.bincount(syn, weights=bits01, minlength=1 << r).astype(np.int64)
    size = 1 << (n - r)
    return np.minimum(ones, size - ones), syn


def affine_structure_check(f: BoolFun, d: int, delta) -> AffineReport:
    """Is f non-constant (disperser) / delta-balanced (extractor) on every affine subspace of dim >= d?

    An affine subspace is a coset of H = C^perp for a constraint space C of
    dimension n - d'.  For n within the affine cap every d' >= d is scanned;
    above it only codimension <= 3 families are covered.
    """
    n = f.n
    delta = Fraction(delta)
    if not 0 <= d <= n:
        raise ValidationError(f"d={d} out of range [0, {n}]")
    full = n <= CAPS["affine"]
    if full:
        codims = range(0, n - d + 1)
        coverage = "all affine subspaces of dimension >= d"
    else:
        if n - d > 3:
            raise CapExceededError(f"n={n} > {CAPS['affine']}: only codimension <= 3 is supported, got {n - d}")
        codims = range(0, n - d + 1)
        coverage = "codimension <= 3 families"
        count = sum(gaussian_binomial(n, r) for r in codims)
        if count > CAPS["slam"]:
            raise CapExceededError(f"{count} constraint spaces to scan exceeds cap {CAPS['slam']}")
    bits = f.bits().astype(np.float64)
    worst = None
    worst_coset = None
    constant = None
    for r in codims:
        size = 1 << (n - r)
        for C in enumerate_subspaces(n, r, cap=max(n, CAPS["enum"])):
            mins, _ = _coset_scan(bits, n, C)
            j = int(np.argmin(mins))
            frac = Fraction(int(mins[j]), size)
            if worst is None or frac < worst:
                worst = frac
                H = orthogonal_complement(C)
                shift = _syndrome_preimage(C, j)
                worst_coset = AffineSubspace(H, shift)
            if constant is None and mins[j] == 0:
                H = orthogonal_complement(C)
                constant = AffineSubspace(H, _syndrome_preimage(C, j))
    disperser = constant is None
    extractor = worst > delta
    lb = n - d + 1 if (disperser or extractor) else 0
    return AffineReport(n, d, delta, disperser, extractor, worst, worst_coset, constant, coverage, lb)


def _syndrome_preimage(C: Subspace, s: int) -> int:
    """Some x with c_i . x = bit i of s for the RREF rows c_i of C."""
    # with lowest-bit pivots, setting x at the pivot of row i affects only row i
    x = 0
    for i, p in enumerate(C.pivots):
        if (s >> i) & 1:
            x |= 1 << p
    return x
