"""Exception types and the global size caps."""

from __future__ import annotations


class ValidationError(ValueError):
    """Malformed input: bad spec string, wrong arity, broken precondition."""

    def __init__(self, msg, line=None):
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)
        self.line = line


class CapExceededError(ValueError):
    """A size guard tripped; raise the cap explicitly if you mean it."""


class DependentConstraintsError(ValidationError):
    pass


class PathIndependenceError(ValidationError):
    """Two equal-frequency streams reach different states.

    ``witness`` is a pair of index sequences (1-based) exhibiting the violation.
    """

    def __init__(self, msg, witness):
        super().__init__(msg)
        self.witness = witness


# Hard limits; the CLI exposes them through --caps.
CAPS = {
    "arity": 26,  # truth-table functions and BitVec dimension
    "enum": 14,  # full subspace enumeration
    "odd_set": 20,  # dim(L) for odd_set / span listing
    "slam": 1 << 22,  # a * b**n * n * m for super_slam
    "comm": 13,  # exact protocol evaluation
    "onebit": 4,  # exhaustive one-bit search
    "affine": 8,  # full affine enumeration
    "ltf_support": 4_000_000,  # enumerated below-threshold inputs of an LTF
}


def check_cap(name, value, what=None):
    limit = CAPS[name]
    if value > limit:
        raise CapExceededError(f"{what or name}={value} exceeds cap {limit} (--caps {name}=...)")


def set_caps(**kwargs):
    for k, v in kwargs.items():
        if k not in CAPS:
            raise ValidationError(f"unknown cap {k!r}")
        CAPS[k] = int(v)
