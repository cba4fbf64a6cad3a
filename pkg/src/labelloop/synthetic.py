"""Seeded synthetic corpora for benchmarks, demos and the acceptance suite.

Documents are Gaussian blobs: each class has a fixed mean (separation_scale
along its own axis) and unit-variance isotropic noise. Class sizes follow
the requested fractions via largest-remainder apportionment, so the counts
are exact and deterministic. The default mirrors a three-class news-framing
setup with a 10/29/61 percent class skew.
"""

import numpy as np

from .corpus import Corpus, Document
from .rng import make_rng

DEFAULT_LABELS = ("frame_political", "frame_crime", "frame_legality")
DEFAULT_FRACTIONS = (0.10, 0.29, 0.61)

# Calibrated once so a head trained on the full default pool lands in the
# 0.85-0.95 macro-F1 band on the held-out test split (checked over the
# first five generator seeds).
DEFAULT_SEPARATION = 2.4


def apportion(total: int, fractions: tuple[float, ...]) -> list[int]:
    """Largest-remainder apportionment of `total` items to the fractions."""
    if total < 1:
        raise ValueError("total must be positive")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {sum(fractions)}")
    raw = [total * f for f in fractions]
    counts = [int(np.floor(r)) for r in raw]
    remainders = [(r - c, -i) for i, (r, c) in enumerate(zip(raw, counts))]
    for _, neg_i in sorted(remainders, reverse=True)[: total - sum(counts)]:
        counts[-neg_i] += 1
    return counts


def make_blob_corpus(
    n_docs: int = 2458,
    dim: int = 16,
    labels: tuple[str, ...] = DEFAULT_LABELS,
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS,
    separation: float = DEFAULT_SEPARATION,
    rng_seed: int = 0,
) -> Corpus:
    """Deterministic Gaussian-blob corpus with exact per-class counts."""
    if len(labels) != len(fractions):
        raise ValueError("labels and fractions must have the same length")
    if dim < len(labels):
        raise ValueError(f"dim {dim} must be at least the class count {len(labels)}")
    counts = apportion(n_docs, fractions)
    rng = make_rng(rng_seed)

    means = np.zeros((len(labels), dim))
    for k in range(len(labels)):
        means[k, k] = separation

    docs: list[Document] = []
    width = len(str(n_docs - 1))
    i = 0
    for label, count, mean in zip(labels, counts, means):
        for _ in range(count):
            embedding = mean + rng.standard_normal(dim)
            docs.append(
                Document(
                    id=f"doc-{i:0{width}d}",
                    text=f"synthetic {label} sample {i}",
                    embedding=embedding,
                    gold_label=label,
                )
            )
            i += 1
    return Corpus(docs, label_set=list(labels))
