"""Deterministic randomness shared by every module.

All random draws flow through numpy's PCG64 bit generator seeded via
``SeedSequence``, so a ``(seed, stream)`` pair fully determines a draw
sequence across runs and platforms. Distinct concerns (pool/test split,
seed-set selection, per-round random sampling) use distinct stream ids so
their sequences never overlap while remaining reproducible from the one
integer recorded in a session's config.
"""

from collections.abc import Sequence

import numpy as np

# Stream ids. Query selection for round r uses QUERY_STREAM_BASE + r.
SPLIT_STREAM = 0
SEED_SELECT_STREAM = 1
QUERY_STREAM_BASE = 2


def _nonnegative(seed: int) -> int:
    # SeedSequence only takes non-negative entropy; fold negatives in
    # without collisions.
    return 2 * seed if seed >= 0 else -2 * seed - 1


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Return the canonical generator for ``(seed, stream)``."""
    ss = np.random.SeedSequence(_nonnegative(seed), spawn_key=(stream,))
    return np.random.Generator(np.random.PCG64(ss))


def fisher_yates_sample(items: Sequence, n: int, rng: np.random.Generator) -> list:
    """Uniform sample of ``n`` items without replacement, in selection order.

    Partial Fisher-Yates over a copy of ``items``; the input order is the
    sampling frame, so identical (items, n, generator state) always yield
    the same result. With ``n == len(items)`` this is a full shuffle.
    """
    if n < 0:
        raise ValueError(f"sample size must be non-negative, got {n}")
    if n > len(items):
        raise ValueError(f"sample size {n} exceeds population size {len(items)}")
    arr = list(items)
    for i in range(n):
        j = i + int(rng.integers(0, len(arr) - i))
        arr[i], arr[j] = arr[j], arr[i]
    return arr[:n]
