"""Deterministic, splittable random streams.

Every stream is a numpy ``PCG64`` generator seeded from a ``SeedSequence``
whose spawn key names the stream's position (clause slot, grid cell,
trial index, ...). A stream therefore depends only on the master seed and
its key, never on the order in which streams are created.
"""
from __future__ import annotations

import numpy as np

RNG_SCHEME = "numpy-PCG64-seedsequence-v1"

# spawn-key tags, kept stable across releases
CNF_SLOT = 0
XOR_SLOT = 1
TRIAL = 2
CELL = 3
PROBE = 4


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def derive_seed(seed: int, *key: int) -> int:
    """A 63-bit integer seed for the child stream ``key``."""
    words = np.random.SeedSequence(seed, spawn_key=key).generate_state(2, dtype=np.uint32)
    return int((int(words[0]) << 31) ^ int(words[1]))
