"""Linear sketching over F_2: exact Fourier dimension, sketches, one-way protocols and stream automata."""

from __future__ import annotations

from ._backend import BACKEND
from .boolfn import BoolFun, Spectrum, builtin, compose, convolve, inverse_wht, shift, wht
from .commsim import OneWayProtocol, PairDistribution, best_one_bit_error, exact_error
from .errors import CAPS, CapExceededError, PathIndependenceError, ValidationError, set_caps
from .fourierdim import bound_report, dim_profile, exact_dim, max_subspace_weight
from .gf2 import Gf2Matrix, Subspace, rank, standard_domination_decompose, super_slam
from .sketch import LtfSpec, SketchScheme, deterministic_sketch, ltf_sketch, random_parity_sketch, sign_trick_sketch
from .streamsim import Automaton, Stream, check_path_independence, coset_check, kernel

__version__ = "0.1.0"

# Version numbers of the on-disk formats read and written by the CLI.
FORMAT_VERSIONS = {
    "truth-table": 1,
    "ltf-weights": 1,
    "gf2-matrix": 1,
    "sketch-scheme": 1,
    "protocol": 1,
    "stream": 1,
    "automaton": 1,
}

__all__ = [
    "BACKEND",
    "BoolFun",
    "Spectrum",
    "builtin",
    "compose",
    "convolve",
    "inverse_wht",
    "shift",
    "wht",
    "OneWayProtocol",
    "PairDistribution",
    "best_one_bit_error",
    "exact_error",
    "CAPS",
    "CapExceededError",
    "PathIndependenceError",
    "ValidationError",
    "set_caps",
    "bound_report",
    "dim_profile",
    "exact_dim",
    "max_subspace_weight",
    "Gf2Matrix",
    "Subspace",
    "rank",
    "standard_domination_decompose",
    "super_slam",
    "LtfSpec",
    "SketchScheme",
    "deterministic_sketch",
    "ltf_sketch",
    "random_parity_sketch",
    "sign_trick_sketch",
    "Automaton",
    "Stream",
    "check_path_independence",
    "coset_check",
    "kernel",
    "FORMAT_VERSIONS",
    "__version__",
]
