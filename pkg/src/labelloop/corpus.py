"""Corpus ingestion, statistics, pool/test splitting, and the built-in embedder.

A corpus is an ordered, immutable collection of documents. Documents carry
an optional embedding vector; all embeddings within one corpus must share a
single dimension. The JSONL wire format is one object per line:

    {"id": str, "text": str, "embedding": [number]?, "gold_label": str?}

Unknown keys are ignored. Everything here is deterministic: ingesting the
same bytes yields the same corpus, and the split/embedding helpers are pure
functions of their arguments.
"""

import json
import math
from dataclasses import dataclass
from hashlib import blake2b
from typing import BinaryIO

import numpy as np

from .errors import IngestError
from .rng import SPLIT_STREAM, fisher_yates_sample, make_rng


@dataclass(eq=False)
class Document:
    """One annotatable text unit."""

    id: str
    text: str = ""
    embedding: np.ndarray | None = None
    gold_label: str | None = None
    assigned_label: str | None = None
    labeled_in_round: int | None = None

    def copy_unlabeled(self) -> "Document":
        """Fresh copy with any assignment state cleared (embedding shared)."""
        return Document(
            id=self.id,
            text=self.text,
            embedding=self.embedding,
            gold_label=self.gold_label,
        )


@dataclass
class ClassDistribution:
    """Gold-label counts and fractions over a corpus."""

    counts: dict[str, int]
    fractions: dict[str, float]
    total: int


class Corpus:
    """Ordered document collection; iteration follows ingestion order.

    Immutable after construction (by convention: nothing in this package
    mutates a corpus once built; sessions work on private document copies).
    """

    def __init__(self, documents: list[Document], label_set: list[str] | None = None):
        self.documents = list(documents)
        self.by_id: dict[str, Document] = {}
        dim: int | None = None
        for doc in self.documents:
            if doc.id in self.by_id:
                raise ValueError(f"duplicate id {doc.id}")
            self.by_id[doc.id] = doc
            if doc.embedding is not None:
                emb = np.asarray(doc.embedding, dtype=np.float64)
                if emb.ndim != 1 or emb.size < 1:
                    raise ValueError(f"embedding for {doc.id} must be a non-empty vector")
                if not np.all(np.isfinite(emb)):
                    raise ValueError(f"non-finite embedding component in {doc.id}")
                if dim is None:
                    dim = int(emb.size)
                elif emb.size != dim:
                    raise ValueError(
                        f"embedding dimension mismatch for {doc.id}: got {emb.size}, expected {dim}"
                    )
                doc.embedding = emb
        self.dim = dim

        seen_gold: list[str] = []
        seen_set: set[str] = set()
        for doc in self.documents:
            if doc.gold_label is not None and doc.gold_label not in seen_set:
                seen_set.add(doc.gold_label)
                seen_gold.append(doc.gold_label)
        if label_set is None:
            self.label_set = seen_gold
        else:
            self.label_set = list(label_set)
            missing = seen_set - set(self.label_set)
            if missing:
                raise ValueError(f"label_set does not cover gold labels: {sorted(missing)}")

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def ids(self) -> list[str]:
        return [doc.id for doc in self.documents]


def _parse_line(obj: object, lineno: int, expect_dim: int | None) -> Document:
    if not isinstance(obj, dict):
        raise IngestError(f"malformed line {lineno}: expected a JSON object")
    doc_id = obj.get("id")
    if not isinstance(doc_id, str) or not doc_id:
        raise IngestError(f"malformed line {lineno}: missing or invalid 'id'")
    text = obj.get("text", "")
    if not isinstance(text, str):
        raise IngestError(f"malformed line {lineno}: 'text' must be a string")
    gold = obj.get("gold_label")
    if gold is not None and not isinstance(gold, str):
        raise IngestError(f"malformed line {lineno}: 'gold_label' must be a string")

    embedding = None
    raw = obj.get("embedding")
    if raw is not None:
        if not isinstance(raw, list) or not raw or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw
        ):
            raise IngestError(f"malformed line {lineno}: 'embedding' must be a non-empty number array")
        embedding = np.asarray(raw, dtype=np.float64)
        if not np.all(np.isfinite(embedding)):
            raise IngestError(f"non-finite embedding component at line {lineno}")
        if expect_dim is not None and embedding.size != expect_dim:
            raise IngestError(
                f"embedding dimension mismatch at line {lineno}: got {embedding.size}, expected {expect_dim}"
            )
    return Document(id=doc_id, text=text, embedding=embedding, gold_label=gold)


def ingest_corpus(source: bytes | bytearray | BinaryIO) -> Corpus:
    """Parse a JSONL byte stream into a Corpus, preserving line order.

    Raises IngestError (with the offending line number) on duplicate ids,
    dimension mismatches, non-finite embedding components, or malformed
    lines. Blank lines are skipped.
    """
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()

    documents: list[Document] = []
    seen: set[str] = set()
    dim: int | None = None
    for lineno, raw_line in enumerate(data.split(b"\n"), start=1):
        line = raw_line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise IngestError(f"malformed line {lineno}: {exc}") from exc
        doc = _parse_line(obj, lineno, dim)
        if doc.id in seen:
            raise IngestError(f"duplicate id {doc.id} at line {lineno}")
        seen.add(doc.id)
        if doc.embedding is not None and dim is None:
            dim = int(doc.embedding.size)
        documents.append(doc)
    return Corpus(documents)


def corpus_to_jsonl(corpus: Corpus) -> bytes:
    """Serialize a corpus back to canonical JSONL bytes (UTF-8, one doc per line)."""
    lines = []
    for doc in corpus.documents:
        record: dict = {"id": doc.id, "text": doc.text}
        if doc.embedding is not None:
            record["embedding"] = [float(v) for v in doc.embedding]
        if doc.gold_label is not None:
            record["gold_label"] = doc.gold_label
        lines.append(json.dumps(record, ensure_ascii=False, separators=(",", ":")))
    return ("\n".join(lines) + "\n").encode("utf-8")


def corpus_stats(corpus: Corpus) -> ClassDistribution:
    """Gold-label counts/fractions; documents without a gold label are excluded.

    With no gold labels at all, every count and fraction is 0 and total is 0.
    """
    if len(corpus) == 0:
        raise ValueError("corpus is empty")
    counts = {label: 0 for label in corpus.label_set}
    for doc in corpus:
        if doc.gold_label is not None:
            counts[doc.gold_label] += 1
    total = sum(counts.values())
    if total > 0:
        fractions = {label: counts[label] / total for label in counts}
    else:
        fractions = {label: 0.0 for label in counts}
    return ClassDistribution(counts=counts, fractions=fractions, total=total)


def split_pool_test(corpus: Corpus, test_fraction: float, rng_seed: int) -> tuple[list[str], list[str]]:
    """Deterministic unstratified pool/test split.

    Test size is round-half-away-from-zero(n * test_fraction); the corpus id
    list is shuffled by the seeded generator and the first test-size ids
    become the test set. Returns (pool_ids, test_ids), which are disjoint
    and together cover the corpus.
    """
    if not (0.0 < test_fraction < 1.0):
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n = len(corpus)
    if n < 2:
        raise ValueError(f"corpus must have at least 2 documents, got {n}")
    test_size = int(math.floor(n * test_fraction + 0.5))
    if test_size < 1 or test_size >= n:
        raise ValueError(
            f"split of {n} documents at fraction {test_fraction} leaves an empty pool or test set"
        )
    shuffled = fisher_yates_sample(corpus.ids(), n, make_rng(rng_seed, SPLIT_STREAM))
    return shuffled[test_size:], shuffled[:test_size]


def hash_embed(text: str, dim: int, salt: int = 0) -> np.ndarray:
    """Deterministic feature-hashing embedding of a text.

    Tokens are the lowercased, Unicode-whitespace-delimited words. Each token
    is hashed (blake2b, 8-byte digest, salted) to a bucket in [0, dim) and a
    +/-1 sign; the bucket accumulates the sign. The result is L2-normalized
    unless it is all-zero (e.g. empty text). Identical input yields identical
    output across runs and platforms.
    """
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


def attach_hash_embeddings(corpus: Corpus, dim: int, salt: int = 0) -> Corpus:
    """Return a corpus whose missing embeddings are filled in via hash_embed."""
    docs = []
    for doc in corpus:
        emb = doc.embedding if doc.embedding is not None else hash_embed(doc.text, dim, salt)
        docs.append(Document(id=doc.id, text=doc.text, embedding=emb, gold_label=doc.gold_label))
    return Corpus(docs, label_set=corpus.label_set)
