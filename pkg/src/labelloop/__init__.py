"""labelloop: annotate less, classify well.

Pool-based active learning over frozen document embeddings: a linear
softmax head is retrained every round on the labeled set, and the next
batch of documents to annotate is chosen by prediction uncertainty
(smallest top-2 logit margin by default). Ships with a JSONL corpus
format, a deterministic built-in text embedder, an oracle-driven
simulation harness, an HTTP service, and a CLI.
"""

from .classifier import LinearHead, Metrics, TrainConfig, evaluate, predict_logits, softmax, train_head
from .corpus import (
    ClassDistribution,
    Corpus,
    Document,
    corpus_stats,
    corpus_to_jsonl,
    hash_embed,
    ingest_corpus,
    split_pool_test,
)
from .errors import BackendError, IngestError, LabelLoopError, SessionError
from .session import (
    Phase,
    RoundRecord,
    SessionConfig,
    SessionState,
    create_session,
    export_history,
    load_session,
    next_batch,
    run_simulation,
    save_session,
    should_stop,
    submit_labels,
)
from .strategies import QueryStrategy, ScoreRecord, score_documents, select_query_batch, select_seed

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "ClassDistribution",
    "Corpus",
    "Document",
    "IngestError",
    "LabelLoopError",
    "LinearHead",
    "Metrics",
    "Phase",
    "QueryStrategy",
    "RoundRecord",
    "ScoreRecord",
    "SessionConfig",
    "SessionError",
    "SessionState",
    "TrainConfig",
    "corpus_stats",
    "corpus_to_jsonl",
    "create_session",
    "evaluate",
    "export_history",
    "hash_embed",
    "ingest_corpus",
    "load_session",
    "next_batch",
    "predict_logits",
    "run_simulation",
    "save_session",
    "score_documents",
    "select_query_batch",
    "select_seed",
    "should_stop",
    "softmax",
    "split_pool_test",
    "submit_labels",
    "train_head",
]
