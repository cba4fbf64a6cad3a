"""The annotation-session state machine.

A session owns a private copy of its corpus and walks the loop

    seed batch -> label -> train -> evaluate -> query batch -> label -> ...

Labeling the seed set counts as round 0 and produces the first trained
head and history record. Each completed round retrains the head from zero
initialization on all labeled documents, evaluates on the held-out test
set (when gold test labels exist), and either stops or queries the next
batch with the freshly trained head.

State invariants maintained by every operation:
  * labeled, unlabeled and pending ids partition the pool; the test set is
    disjoint from the pool.
  * after completing round r, n_labeled = min(n_seed + r * k, pool size).

Sessions serialize to a single versioned JSON document whose float fields
round-trip exactly (shortest-repr decimal encoding); a checksum over the
canonical payload rejects tampered files.
"""

import json
import time
from dataclasses import dataclass, field
from enum import Enum
from hashlib import sha256
from pathlib import Path

import numpy as np

from .classifier import LinearHead, Metrics, TrainConfig, evaluate, train_head
from .corpus import Corpus, Document, split_pool_test
from .errors import SessionError
from .rng import QUERY_STREAM_BASE, SEED_SELECT_STREAM, make_rng
from .strategies import QueryStrategy, score_documents, select_query_batch, select_seed

SESSION_FILE_VERSION = 1


class Phase(str, Enum):
    AWAITING_SEED_LABELS = "awaiting_seed_labels"
    AWAITING_BATCH_LABELS = "awaiting_batch_labels"
    TRAINING = "training"
    DONE = "done"


@dataclass
class SessionConfig:
    """Budgets and knobs for one annotation session."""

    label_set: list[str]
    test_fraction: float = 0.2
    n_seed: int = 160
    batch_size: int = 40
    max_rounds: int = 10
    strategy: QueryStrategy = QueryStrategy.MARGIN
    rng_seed: int = 0
    train: TrainConfig = field(default_factory=TrainConfig)
    stop_f1_threshold: float | None = None

    def __post_init__(self) -> None:
        if len(self.label_set) < 2:
            raise ValueError(f"need at least 2 labels, got {len(self.label_set)}")
        if len(set(self.label_set)) != len(self.label_set):
            raise ValueError("label_set contains duplicates")
        if not (0.0 < self.test_fraction < 1.0):
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.n_seed < 1:
            raise ValueError(f"n_seed must be positive, got {self.n_seed}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if self.max_rounds < 0:
            raise ValueError(f"max_rounds must be non-negative, got {self.max_rounds}")
        self.strategy = QueryStrategy(self.strategy)
        if self.stop_f1_threshold is not None and not (0.0 < self.stop_f1_threshold <= 1.0):
            raise ValueError(f"stop_f1_threshold must be in (0, 1], got {self.stop_f1_threshold}")


@dataclass
class RoundRecord:
    """Per-round outcome; metric fields are None when no gold test labels exist."""

    round: int
    n_labeled: int
    macro_f1: float | None
    accuracy: float | None
    per_class_f1: dict[str, float] | None
    queried_ids: list[str]
    minority_fraction: float | None
    wall_time_ms: float
    confusion: list[list[int]] | None = None


@dataclass(eq=False)
class SessionState:
    """Mutable state of one session; mutate only through the module functions."""

    config: SessionConfig
    corpus: Corpus
    phase: Phase
    round: int
    labeled_ids: list[str]
    unlabeled_ids: list[str]
    test_ids: list[str]
    pending_batch: list[str]
    pending_labels: dict[str, str]
    current_head: LinearHead | None
    history: list[RoundRecord]
    minority_label: str | None

    def pool_ids(self) -> list[str]:
        return self.labeled_ids + self.unlabeled_ids + self.pending_batch

    def n_labeled(self) -> int:
        return len(self.labeled_ids)

    def check_partition(self) -> None:
        """Raise SessionError if the pool partition invariant is broken."""
        labeled, unlabeled = set(self.labeled_ids), set(self.unlabeled_ids)
        pending, test = set(self.pending_batch), set(self.test_ids)
        pool = labeled | unlabeled | pending
        sizes = len(self.labeled_ids) + len(self.unlabeled_ids) + len(self.pending_batch)
        if len(pool) != sizes:
            raise SessionError("pool partition overlap: labeled/unlabeled/pending intersect")
        if pool & test:
            raise SessionError("test set intersects the pool")
        if pool | test != set(self.corpus.by_id):
            raise SessionError("pool and test do not cover the corpus")


def _gold_counts(docs: list, label_set: list[str]) -> dict[str, int]:
    counts = {label: 0 for label in label_set}
    for doc in docs:
        if doc.gold_label is not None:
            counts[doc.gold_label] += 1
    return counts


def create_session(corpus: Corpus, config: SessionConfig) -> SessionState:
    """Split the corpus, draw the seed batch, and return the initial state.

    The session gets private copies of the documents (assignments cleared),
    so concurrent sessions over one corpus never interfere.
    """
    if list(corpus.label_set) != list(config.label_set):
        raise SessionError(
            f"corpus label set {corpus.label_set} does not match config label set {config.label_set}"
        )
    missing = [doc.id for doc in corpus if doc.embedding is None]
    if missing:
        raise SessionError(
            f"{len(missing)} document(s) have no embedding (first: {missing[0]}); "
            "ingest with an embedder or configure a backend"
        )

    private = Corpus(
        [doc.copy_unlabeled() for doc in corpus], label_set=list(config.label_set)
    )
    pool_ids, test_ids = split_pool_test(private, config.test_fraction, config.rng_seed)

    if config.stop_f1_threshold is not None:
        untestable = [i for i in test_ids if private.by_id[i].gold_label is None]
        if untestable:
            raise SessionError(
                "stop_f1_threshold requires gold labels on the test set; "
                f"{len(untestable)} test document(s) lack one"
            )

    if config.n_seed > len(pool_ids):
        raise SessionError(f"seed size {config.n_seed} exceeds pool size {len(pool_ids)}")
    seed_ids = select_seed(pool_ids, config.n_seed, make_rng(config.rng_seed, SEED_SELECT_STREAM))
    seed_set = set(seed_ids)

    pool_docs = [private.by_id[i] for i in pool_ids]
    minority_label = None
    if all(doc.gold_label is not None for doc in pool_docs):
        counts = _gold_counts(pool_docs, config.label_set)
        minority_label = min(config.label_set, key=lambda lb: (counts[lb], config.label_set.index(lb)))

    state = SessionState(
        config=config,
        corpus=private,
        phase=Phase.AWAITING_SEED_LABELS,
        round=0,
        labeled_ids=[],
        unlabeled_ids=[i for i in pool_ids if i not in seed_set],
        test_ids=test_ids,
        pending_batch=seed_ids,
        pending_labels={},
        current_head=None,
        history=[],
        minority_label=minority_label,
    )
    state.check_partition()
    return state


def next_batch(state: SessionState) -> tuple[int, list[str], list[Document]]:
    """Return (round, pending ids, documents) awaiting labels; idempotent."""
    if state.phase not in (Phase.AWAITING_SEED_LABELS, Phase.AWAITING_BATCH_LABELS):
        raise SessionError(f"no batch available in phase {state.phase.value}")
    ids = list(state.pending_batch)
    return state.round, ids, [state.corpus.by_id[i] for i in ids]


def should_stop(state: SessionState) -> tuple[bool, str | None]:
    """Stopping decision after a round completes; returns (stop, reason)."""
    if state.round >= state.config.max_rounds:
        return True, "max_rounds"
    if not state.unlabeled_ids:
        return True, "pool_exhausted"
    if state.config.stop_f1_threshold is not None and state.history:
        latest = state.history[-1].macro_f1
        if latest is not None and latest >= state.config.stop_f1_threshold:
            return True, "f1_threshold"
    return False, None


def submit_labels(state: SessionState, labels: dict[str, str]) -> RoundRecord | None:
    """Record labels for pending documents; completes the round when full.

    Partial submissions accumulate. All validation happens before any state
    changes, so a rejected request leaves the session untouched. When the
    last pending document is labeled the round completes: documents move to
    the labeled set, the head retrains on every labeled document, the test
    set is evaluated (if it has gold labels), a RoundRecord is appended,
    and the session either stops or queries the next batch.
    """
    if state.phase not in (Phase.AWAITING_SEED_LABELS, Phase.AWAITING_BATCH_LABELS):
        raise SessionError(f"cannot submit labels in phase {state.phase.value}")
    pending = set(state.pending_batch)
    labeled = set(state.labeled_ids)
    for doc_id, label in labels.items():
        if doc_id not in state.corpus.by_id:
            raise SessionError(f"unknown id {doc_id}")
        if doc_id in labeled:
            raise SessionError(f"document {doc_id} is already labeled")
        if doc_id not in pending:
            raise SessionError(f"document {doc_id} is not in the pending batch")
        if label not in state.config.label_set:
            raise SessionError(f"label {label!r} is not in the session label set")

    state.pending_labels.update(labels)
    if set(state.pending_labels) != pending:
        return None
    return _complete_round(state)


def _complete_round(state: SessionState) -> RoundRecord:
    started = time.perf_counter()
    state.phase = Phase.TRAINING

    batch = list(state.pending_batch)
    for doc_id in batch:
        doc = state.corpus.by_id[doc_id]
        doc.assigned_label = state.pending_labels[doc_id]
        doc.labeled_in_round = state.round
        state.labeled_ids.append(doc_id)
    state.pending_batch = []
    state.pending_labels = {}

    label_index = {label: i for i, label in enumerate(state.config.label_set)}
    train_docs = [state.corpus.by_id[i] for i in state.labeled_ids]
    x = np.stack([doc.embedding for doc in train_docs])
    y = np.asarray([label_index[doc.assigned_label] for doc in train_docs])
    state.current_head = train_head(
        x, y, list(state.config.label_set), state.config.train, state.corpus.dim
    )

    test_docs = [state.corpus.by_id[i] for i in state.test_ids]
    metrics: Metrics | None = None
    if all(doc.gold_label is not None for doc in test_docs):
        metrics = evaluate(state.current_head, test_docs)

    minority_fraction = None
    if state.minority_label is not None and batch:
        hits = sum(
            1 for i in batch if state.corpus.by_id[i].assigned_label == state.minority_label
        )
        minority_fraction = hits / len(batch)

    record = RoundRecord(
        round=state.round,
        n_labeled=len(state.labeled_ids),
        macro_f1=metrics.macro_f1 if metrics else None,
        accuracy=metrics.accuracy if metrics else None,
        per_class_f1=(
            {label: scores.f1 for label, scores in metrics.per_class.items()} if metrics else None
        ),
        queried_ids=batch,
        minority_fraction=minority_fraction,
        wall_time_ms=(time.perf_counter() - started) * 1000.0,
        confusion=metrics.confusion.tolist() if metrics else None,
    )
    state.history.append(record)

    stop, _reason = should_stop(state)
    if stop:
        state.phase = Phase.DONE
        state.check_partition()
        return record

    unlabeled_docs = [state.corpus.by_id[i] for i in state.unlabeled_ids]
    scores = score_documents(state.current_head, unlabeled_docs)
    next_round = state.round + 1
    query_rng = make_rng(state.config.rng_seed, QUERY_STREAM_BASE + next_round)
    selected = select_query_batch(scores, state.config.batch_size, state.config.strategy, query_rng)
    selected_set = set(selected)

    state.pending_batch = selected
    state.unlabeled_ids = [i for i in state.unlabeled_ids if i not in selected_set]
    state.round = next_round
    state.phase = Phase.AWAITING_BATCH_LABELS
    state.check_partition()
    return record


def run_simulation(corpus: Corpus, config: SessionConfig) -> list[RoundRecord]:
    """Drive a full session answering every query with gold labels."""
    unlabeled = [doc.id for doc in corpus if doc.gold_label is None]
    if unlabeled:
        raise SessionError(
            f"simulation requires gold labels on every document; {len(unlabeled)} lack one"
        )
    state = create_session(corpus, config)
    while state.phase in (Phase.AWAITING_SEED_LABELS, Phase.AWAITING_BATCH_LABELS):
        _, ids, docs = next_batch(state)
        submit_labels(state, {doc.id: doc.gold_label for doc in docs})
    return state.history


def export_history(history: list[RoundRecord], label_order: list[str] | None = None) -> bytes:
    """Render history as deterministic CSV bytes (6-decimal fixed format).

    Columns: round, n_labeled, macro_f1, accuracy, one f1_<label> column per
    label, minority_fraction. Metric cells are empty when a record has no
    metrics (live sessions without gold test labels).
    """
    if not history:
        raise ValueError("empty history")
    if label_order is None:
        for record in history:
            if record.per_class_f1 is not None:
                label_order = list(record.per_class_f1)
                break
        else:
            raise ValueError("cannot derive label columns: no record carries metrics")

    def fmt(value: float | None) -> str:
        return "" if value is None else f"{value:.6f}"

    header = ["round", "n_labeled", "macro_f1", "accuracy"]
    header += [f"f1_{label}" for label in label_order]
    header.append("minority_fraction")
    lines = [",".join(header)]
    for record in history:
        row = [str(record.round), str(record.n_labeled), fmt(record.macro_f1), fmt(record.accuracy)]
        for label in label_order:
            row.append(fmt(record.per_class_f1.get(label) if record.per_class_f1 else None))
        row.append(fmt(record.minority_fraction))
        lines.append(",".join(row))
    return ("\n".join(lines) + "\n").encode("utf-8")


# --- serialization ---------------------------------------------------------


def _document_to_dict(doc: Document) -> dict:
    return {
        "id": doc.id,
        "text": doc.text,
        "embedding": None if doc.embedding is None else [float(v) for v in doc.embedding],
        "gold_label": doc.gold_label,
        "assigned_label": doc.assigned_label,
        "labeled_in_round": doc.labeled_in_round,
    }


def _document_from_dict(data: dict) -> Document:
    emb = data.get("embedding")
    return Document(
        id=data["id"],
        text=data.get("text", ""),
        embedding=None if emb is None else np.asarray(emb, dtype=np.float64),
        gold_label=data.get("gold_label"),
        assigned_label=data.get("assigned_label"),
        labeled_in_round=data.get("labeled_in_round"),
    )


def _record_to_dict(record: RoundRecord) -> dict:
    return {
        "round": record.round,
        "n_labeled": record.n_labeled,
        "macro_f1": record.macro_f1,
        "accuracy": record.accuracy,
        "per_class_f1": record.per_class_f1,
        "queried_ids": record.queried_ids,
        "minority_fraction": record.minority_fraction,
        "wall_time_ms": record.wall_time_ms,
        "confusion": record.confusion,
    }


def _record_from_dict(data: dict) -> RoundRecord:
    return RoundRecord(
        round=data["round"],
        n_labeled=data["n_labeled"],
        macro_f1=data.get("macro_f1"),
        accuracy=data.get("accuracy"),
        per_class_f1=data.get("per_class_f1"),
        queried_ids=list(data["queried_ids"]),
        minority_fraction=data.get("minority_fraction"),
        wall_time_ms=data.get("wall_time_ms", 0.0),
        confusion=data.get("confusion"),
    )


def session_to_payload(state: SessionState) -> dict:
    """Plain-data form of a session; floats keep full precision via repr."""
    cfg = state.config
    head = state.current_head
    return {
        "config": {
            "label_set": list(cfg.label_set),
            "test_fraction": cfg.test_fraction,
            "n_seed": cfg.n_seed,
            "batch_size": cfg.batch_size,
            "max_rounds": cfg.max_rounds,
            "strategy": cfg.strategy.value,
            "rng_seed": cfg.rng_seed,
            "train": {
                "learning_rate": cfg.train.learning_rate,
                "max_epochs": cfg.train.max_epochs,
                "loss_tolerance": cfg.train.loss_tolerance,
                "l2_lambda": cfg.train.l2_lambda,
            },
            "stop_f1_threshold": cfg.stop_f1_threshold,
        },
        "documents": [_document_to_dict(doc) for doc in state.corpus],
        "phase": state.phase.value,
        "round": state.round,
        "labeled_ids": list(state.labeled_ids),
        "unlabeled_ids": list(state.unlabeled_ids),
        "test_ids": list(state.test_ids),
        "pending_batch": list(state.pending_batch),
        "pending_labels": dict(state.pending_labels),
        "head": None
        if head is None
        else {
            "weights": [[float(v) for v in row] for row in head.weights],
            "bias": [float(v) for v in head.bias],
            "label_order": list(head.label_order),
        },
        "minority_label": state.minority_label,
        "history": [_record_to_dict(record) for record in state.history],
    }


def session_from_payload(payload: dict) -> SessionState:
    try:
        cfg_data = payload["config"]
        train_data = cfg_data["train"]
        config = SessionConfig(
            label_set=list(cfg_data["label_set"]),
            test_fraction=cfg_data["test_fraction"],
            n_seed=cfg_data["n_seed"],
            batch_size=cfg_data["batch_size"],
            max_rounds=cfg_data["max_rounds"],
            strategy=QueryStrategy(cfg_data["strategy"]),
            rng_seed=cfg_data["rng_seed"],
            train=TrainConfig(
                learning_rate=train_data["learning_rate"],
                max_epochs=train_data["max_epochs"],
                loss_tolerance=train_data["loss_tolerance"],
                l2_lambda=train_data["l2_lambda"],
            ),
            stop_f1_threshold=cfg_data.get("stop_f1_threshold"),
        )
        corpus = Corpus(
            [_document_from_dict(d) for d in payload["documents"]],
            label_set=list(cfg_data["label_set"]),
        )
        head_data = payload.get("head")
        head = None
        if head_data is not None:
            head = LinearHead(
                weights=np.asarray(head_data["weights"], dtype=np.float64),
                bias=np.asarray(head_data["bias"], dtype=np.float64),
                label_order=list(head_data["label_order"]),
            )
        state = SessionState(
            config=config,
            corpus=corpus,
            phase=Phase(payload["phase"]),
            round=payload["round"],
            labeled_ids=list(payload["labeled_ids"]),
            unlabeled_ids=list(payload["unlabeled_ids"]),
            test_ids=list(payload["test_ids"]),
            pending_batch=list(payload["pending_batch"]),
            pending_labels=dict(payload["pending_labels"]),
            current_head=head,
            history=[_record_from_dict(r) for r in payload["history"]],
            minority_label=payload.get("minority_label"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SessionError(f"corrupted session file: {exc}") from exc
    state.check_partition()
    return state


def _canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def session_to_json(state: SessionState) -> bytes:
    """Versioned, checksummed JSON document for one session."""
    payload = session_to_payload(state)
    body = _canonical(payload)
    doc = {
        "version": SESSION_FILE_VERSION,
        "sha256": sha256(body.encode("utf-8")).hexdigest(),
        "session": payload,
    }
    return _canonical(doc).encode("utf-8")


def session_from_json(data: bytes) -> SessionState:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SessionError(f"corrupted session file: {exc}") from exc
    if not isinstance(doc, dict):
        raise SessionError("corrupted session file: not a JSON object")
    version = doc.get("version")
    if version != SESSION_FILE_VERSION:
        raise SessionError(f"unsupported session file version {version!r}")
    payload = doc.get("session")
    if not isinstance(payload, dict):
        raise SessionError("corrupted session file: missing session payload")
    body = _canonical(payload)
    if sha256(body.encode("utf-8")).hexdigest() != doc.get("sha256"):
        raise SessionError("corrupted session file: checksum mismatch")
    return session_from_payload(payload)


def save_session(state: SessionState, path: str | Path) -> None:
    """Write the session to disk (atomic: temp file + rename)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(session_to_json(state))
    tmp.replace(path)


def load_session(path: str | Path) -> SessionState:
    """Load a session written by save_session; validates version and checksum."""
    return session_from_json(Path(path).read_bytes())
