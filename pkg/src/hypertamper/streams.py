"""Seeded random streams.

A master seed never feeds a shared generator. Every replicate gets its own
stream, derived by

    stream(seed, *key) = default_rng(SeedSequence(seed, spawn_key=key))

where ``key`` is the replicate index, optionally prefixed by a cell or
measure index. This is the same derivation ``SeedSequence.spawn`` uses, so the
streams are statistically independent and results do not depend on how
replicates are distributed over workers.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def streams(seed: int, count: int, *prefix: int, start: int = 0) -> list[np.random.Generator]:
    """Streams for replicates ``start .. start+count-1`` under ``prefix``."""
    return [stream(seed, *prefix, r) for r in range(start, start + count)]
