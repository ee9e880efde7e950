"""Deterministic seed derivation for experiments.

Every experiment consumes randomness through per-purpose child seeds derived
from one master ``numpy.random.SeedSequence``.  The derivation is a pure
function of the master seed, a short purpose tag and integer indices:

    child = SeedSequence(master.entropy,
                         spawn_key=master.spawn_key + (crc32(tag), *indices))

Because the child depends only on (master, tag, indices) and never on how many
other seeds were derived before it, parallel and serial execution draw from
identical streams.
"""

from __future__ import annotations

import zlib

import numpy as np


def as_seed_sequence(seed) -> np.random.SeedSequence:
    """Coerce an int, None or SeedSequence into a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def derive(master, tag: str, *indices: int) -> np.random.SeedSequence:
    """Derive the child seed identified by (tag, *indices) under master.

    The same arguments always yield the same child, independent of call
    order, so work can be farmed out to processes in any schedule.
    """
    master = as_seed_sequence(master)
    if not tag:
        raise ValueError("seed tag must be a non-empty string")
    key = zlib.crc32(tag.encode("utf-8")) & 0xFFFFFFFF
    for ix in indices:
        if ix < 0:
            raise ValueError("seed indices must be non-negative")
    spawn_key = tuple(master.spawn_key) + (key,) + tuple(int(ix) for ix in indices)
    return np.random.SeedSequence(master.entropy, spawn_key=spawn_key)


def derive_rng(master, tag: str, *indices: int) -> np.random.Generator:
    """Generator seeded by ``derive(master, tag, *indices)``."""
    return np.random.default_rng(derive(master, tag, *indices))
