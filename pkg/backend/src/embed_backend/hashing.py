"""Deterministic dummy embedder.

Identical hashing scheme to the annotation engine's built-in embedder:
lowercased whitespace tokens, blake2b (8-byte digest, salted) mapping each
token to a bucket and a +/-1 sign, L2 normalization unless all-zero. The
arithmetic is kept operation-for-operation the same so both sides of the
wire agree bit-for-bit on shared fixtures.
"""

from hashlib import blake2b

import numpy as np


def hash_embed(text: str, dim: int, salt: int = 0) -> np.ndarray:
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    vec = np.zeros(dim, dtype=np.float64)
    for token in text.lower().split():
        digest = blake2b(f"{salt}:{token}".encode("utf-8"), digest_size=8).digest()
        h = int.from_bytes(digest, "big")
        sign = 1.0 if h & (1 << 63) == 0 else -1.0
        vec[h % dim] += sign
    norm = float(np.linalg.norm(vec))
    if norm > 0.0:
        vec /= norm
    return vec
