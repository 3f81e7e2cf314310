"""Named random substreams derived from one 64-bit seed."""

from __future__ import annotations

import zlib

import numpy as np


def _key(name) -> int:
    if isinstance(name, (int, np.integer)):
        return int(name) & 0xFFFFFFFF
    return zlib.crc32(str(name).encode())


def derive_rng(seed, *names) -> np.random.Generator:
    """Generator for the substream ``names`` of ``seed``; same inputs, same stream."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(_key(n) for n in names))
    return np.random.default_rng(ss)


def random_bits(rng, n: int) -> int:
    """Uniform element of F_2^n as an int."""
    out = 0
    for start in range(0, n, 32):
        w = min(32, n - start)
        out |= int(rng.integers(0, 1 << w)) << start
    return out
