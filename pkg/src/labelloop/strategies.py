"""Seed-set selection and per-round query selection.

Uncertainty scores are computed from raw logits (margin = gap between the
two largest logits), from softmax probabilities (least confidence,
entropy), or not at all (random, the passive baseline). Every selection is
deterministic: score ties always break by ascending document id, and the
random strategy draws from the shared seeded generator.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .classifier import LinearHead, predict_logits
from .rng import fisher_yates_sample


class QueryStrategy(str, Enum):
    MARGIN = "margin"
    LEAST_CONFIDENCE = "leastconf"
    ENTROPY = "entropy"
    RANDOM = "random"


@dataclass(eq=False)
class ScoreRecord:
    """Per-document uncertainty scores under the current head."""

    doc_id: str
    logits: np.ndarray
    probs: np.ndarray
    margin: float
    least_confidence: float
    entropy: float


def select_seed(pool_ids: list[str], n_seed: int, rng: np.random.Generator) -> list[str]:
    """Uniform random seed set, without replacement, in selection order."""
    if n_seed < 1:
        raise ValueError(f"seed size must be positive, got {n_seed}")
    if n_seed > len(pool_ids):
        raise ValueError(f"seed size {n_seed} exceeds pool size {len(pool_ids)}")
    return fisher_yates_sample(pool_ids, n_seed, rng)


def score_documents(head: LinearHead, docs: list) -> list[ScoreRecord]:
    """Score each document (input order preserved) under the given head."""
    if not docs:
        return []
    rows = []
    for doc in docs:
        if doc.embedding is None:
            raise ValueError(f"document {doc.id} has no embedding")
        rows.append(doc.embedding)
    logits = predict_logits(head, np.stack(rows))

    # Row-wise softmax (shift-stable) and top-2 logit gap.
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    top2 = np.partition(logits, -2, axis=1)[:, -2:]
    margins = top2[:, 1] - top2[:, 0]
    max_probs = probs.max(axis=1)
    entropies = -(probs * np.log(probs)).sum(axis=1)

    records = []
    for i, doc in enumerate(docs):
        records.append(
            ScoreRecord(
                doc_id=doc.id,
                logits=logits[i],
                probs=probs[i],
                margin=float(margins[i]),
                least_confidence=float(1.0 - max_probs[i]),
                entropy=float(entropies[i]),
            )
        )
    return records


def select_query_batch(
    scores: list[ScoreRecord],
    k: int,
    strategy: QueryStrategy,
    rng: np.random.Generator,
) -> list[str]:
    """Pick the k most informative documents under the given strategy.

    Margin keeps the k smallest margins; least-confidence and entropy keep
    the k largest scores; random draws a uniform sample. Ties always break
    by ascending doc id, and if fewer than k documents are available the
    whole pool is returned. The result is sorted by (score, doc_id).
    """
    if k < 1:
        raise ValueError(f"batch size must be positive, got {k}")
    if not scores:
        raise ValueError("empty score list")
    ids = [record.doc_id for record in scores]
    if len(set(ids)) != len(ids):
        raise ValueError("score records contain duplicate doc ids")
    k = min(k, len(scores))

    if strategy == QueryStrategy.RANDOM:
        # No informativeness score: every candidate ties, so the selected
        # sample is returned in ascending-id order.
        return sorted(fisher_yates_sample(ids, k, rng))
    if strategy == QueryStrategy.MARGIN:
        keyed = sorted(scores, key=lambda r: (r.margin, r.doc_id))
    elif strategy == QueryStrategy.LEAST_CONFIDENCE:
        keyed = sorted(scores, key=lambda r: (-r.least_confidence, r.doc_id))
    elif strategy == QueryStrategy.ENTROPY:
        keyed = sorted(scores, key=lambda r: (-r.entropy, r.doc_id))
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return [record.doc_id for record in keyed[:k]]
