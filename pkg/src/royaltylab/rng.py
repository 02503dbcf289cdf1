"""Seeded random streams.

Every random draw in the package comes from numpy's Philox4x64-10, a
counter-based bit generator. A run seed and an optional substream index are
hashed through ``numpy.random.SeedSequence`` (entropy = seed, spawn key =
(index,)) into the Philox key, so substream ``k`` of seed ``s`` yields the
same numbers no matter which worker draws it or in what order.
"""
from __future__ import annotations

import numpy as np


def make_rng(seed: int | np.random.Generator, stream: int | None = None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if int(seed) < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed}")
    if stream is None:
        ss = np.random.SeedSequence(int(seed))
    else:
        ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))
