"""HTTP/JSON service exposing corpora and annotation sessions.

Endpoints (bodies are UTF-8 JSON unless noted):

    POST /corpora                      raw JSONL upload -> 201 {corpus_id, n_docs, dim}
    POST /sessions                     {corpus_id, config} -> 201 {session_id}
    GET  /sessions/{id}                -> {phase, round, n_labeled, n_pool, n_test}
    GET  /sessions/{id}/next-batch     -> {round, items: [{id, text}]}
    POST /sessions/{id}/labels         {labels: {doc_id: label}} -> {phase, round_completed, metrics?}
    GET  /sessions/{id}/history        -> {rounds: [...]}
    GET  /sessions/{id}/history.csv    -> text/csv
    GET  /healthz                      -> 200 "ok"

Sessions are persisted to the data directory after every mutation via an
atomic write (temp file + rename), so a request that fails mid-flight never
corrupts the stored session; per-session mutations are serialized with a
lock. GET responses are pure functions of stored state.
"""

import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass
from hashlib import sha256
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from .backend_client import BackendClient
from .classifier import TrainConfig
from .corpus import Corpus, attach_hash_embeddings, corpus_to_jsonl, ingest_corpus
from .errors import LabelLoopError, SessionError
from .session import (
    Phase,
    RoundRecord,
    SessionConfig,
    SessionState,
    create_session,
    export_history,
    next_batch,
    save_session,
    session_from_json,
    session_to_json,
    submit_labels,
)


@dataclass
class ServiceConfig:
    """Listener address, storage location, and optional embedding backend."""

    host: str = "127.0.0.1"
    port: int = 8000
    data_dir: str | Path = "data"
    backend_url: str | None = None
    max_body_bytes: int = 64 * 1024 * 1024

    def __post_init__(self) -> None:
        if not (1 <= self.port <= 65535):
            raise ValueError(f"port must be in [1, 65535], got {self.port}")
        if self.max_body_bytes < 1:
            raise ValueError("max_body_bytes must be positive")
        self.data_dir = Path(self.data_dir)


# --- request/response models ------------------------------------------------


class TrainConfigModel(BaseModel):
    learning_rate: float = 0.5
    max_epochs: int = 500
    loss_tolerance: float = 1e-7
    l2_lambda: float = 1e-3


class SessionConfigModel(BaseModel):
    label_set: list[str] | None = None
    test_fraction: float = 0.2
    n_seed: int = 160
    batch_size: int = 40
    max_rounds: int = 10
    strategy: str = "margin"
    rng_seed: int = 0
    train: TrainConfigModel = Field(default_factory=TrainConfigModel)
    stop_f1_threshold: float | None = None


class CreateSessionRequest(BaseModel):
    corpus_id: str
    config: SessionConfigModel = Field(default_factory=SessionConfigModel)


class CreateSessionResponse(BaseModel):
    session_id: str


class CorpusUploadResponse(BaseModel):
    corpus_id: str
    n_docs: int
    dim: int | None


class SessionSummary(BaseModel):
    session_id: str
    phase: str
    round: int
    n_labeled: int
    n_pool: int
    n_test: int
    label_set: list[str]


class BatchItem(BaseModel):
    id: str
    text: str


class NextBatchResponse(BaseModel):
    round: int
    items: list[BatchItem]


class SubmitLabelsRequest(BaseModel):
    labels: dict[str, str]


class RoundRecordModel(BaseModel):
    round: int
    n_labeled: int
    macro_f1: float | None
    accuracy: float | None
    per_class_f1: dict[str, float] | None
    queried_ids: list[str]
    minority_fraction: float | None
    wall_time_ms: float
    confusion: list[list[int]] | None

    @classmethod
    def from_record(cls, record: RoundRecord) -> "RoundRecordModel":
        return cls(
            round=record.round,
            n_labeled=record.n_labeled,
            macro_f1=record.macro_f1,
            accuracy=record.accuracy,
            per_class_f1=record.per_class_f1,
            queried_ids=record.queried_ids,
            minority_fraction=record.minority_fraction,
            wall_time_ms=record.wall_time_ms,
            confusion=record.confusion,
        )


class SubmitLabelsResponse(BaseModel):
    phase: str
    round_completed: bool
    metrics: RoundRecordModel | None = None


class HistoryResponse(BaseModel):
    rounds: list[RoundRecordModel]


# --- storage -----------------------------------------------------------------


class DataStore:
    """Disk-backed store for corpora (canonical JSONL) and sessions (JSON)."""

    def __init__(self, data_dir: Path):
        self.corpora_dir = data_dir / "corpora"
        self.sessions_dir = data_dir / "sessions"
        self.corpora_dir.mkdir(parents=True, exist_ok=True)
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self._corpora: dict[str, Corpus] = {}
        self._sessions: dict[str, SessionState] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def session_lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def put_corpus(self, corpus: Corpus) -> str:
        data = corpus_to_jsonl(corpus)
        corpus_id = sha256(data).hexdigest()[:16]
        path = self.corpora_dir / f"{corpus_id}.jsonl"
        if not path.exists():
            tmp = path.with_name(path.name + ".tmp")
            tmp.write_bytes(data)
            tmp.replace(path)
        self._corpora[corpus_id] = corpus
        return corpus_id

    def get_corpus(self, corpus_id: str) -> Corpus | None:
        if corpus_id in self._corpora:
            return self._corpora[corpus_id]
        path = self.corpora_dir / f"{corpus_id}.jsonl"
        if not path.exists():
            return None
        corpus = ingest_corpus(path.read_bytes())
        self._corpora[corpus_id] = corpus
        return corpus

    def session_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.json"

    def put_session(self, session_id: str, state: SessionState) -> None:
        save_session(state, self.session_path(session_id))
        self._sessions[session_id] = state

    def get_session(self, session_id: str) -> SessionState | None:
        if session_id in self._sessions:
            return self._sessions[session_id]
        path = self.session_path(session_id)
        if not path.exists():
            return None
        state = session_from_json(path.read_bytes())
        self._sessions[session_id] = state
        return state

    def drop_cached_session(self, session_id: str) -> None:
        self._sessions.pop(session_id, None)

    def persist_all(self) -> None:
        for session_id, state in list(self._sessions.items()):
            save_session(state, self.session_path(session_id))


# --- application --------------------------------------------------------------


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(config: ServiceConfig) -> FastAPI:
    store = DataStore(Path(config.data_dir))

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        store.persist_all()

    app = FastAPI(title="labelloop", lifespan=lifespan)
    app.state.store = store
    app.state.config = config

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return _error(400, f"invalid request body: {exc.errors()[:3]}")

    @app.exception_handler(LabelLoopError)
    async def on_labelloop_error(request: Request, exc: LabelLoopError):
        return _error(400, str(exc))

    @app.exception_handler(ValueError)
    async def on_value_error(request: Request, exc: ValueError):
        return _error(400, str(exc))

    @app.get("/healthz", response_class=PlainTextResponse)
    def healthz() -> str:
        return "ok"

    @app.post("/corpora", status_code=201, response_model=CorpusUploadResponse)
    async def upload_corpus(request: Request, embed: str | None = None):
        body = await request.body()
        if len(body) > config.max_body_bytes:
            return _error(413, f"body exceeds {config.max_body_bytes} bytes")
        if not body.strip():
            return _error(400, "empty corpus upload")
        corpus = ingest_corpus(body)
        if embed:
            corpus = _resolve_embeddings(corpus, embed)
        corpus_id = store.put_corpus(corpus)
        return CorpusUploadResponse(corpus_id=corpus_id, n_docs=len(corpus), dim=corpus.dim)

    def _resolve_embeddings(corpus: Corpus, embed: str) -> Corpus:
        if embed.startswith("hash:"):
            dim = int(embed.split(":", 1)[1])
            return attach_hash_embeddings(corpus, dim)
        if embed == "backend":
            if not config.backend_url:
                raise SessionError("no embedding backend configured")
            with BackendClient(config.backend_url) as client:
                missing = [doc for doc in corpus if doc.embedding is None]
                if missing:
                    vectors = client.embed_in_batches([doc.text for doc in missing])
                    for doc, vec in zip(missing, vectors):
                        doc.embedding = vec
            return Corpus(list(corpus.documents), label_set=corpus.label_set)
        raise SessionError(f"unknown embed mode {embed!r}; use 'hash:<dim>' or 'backend'")

    @app.post("/sessions", status_code=201, response_model=CreateSessionResponse)
    def create_session_endpoint(body: CreateSessionRequest):
        corpus = store.get_corpus(body.corpus_id)
        if corpus is None:
            return _error(404, f"unknown corpus {body.corpus_id}")
        cfg = body.config
        session_config = SessionConfig(
            label_set=cfg.label_set if cfg.label_set is not None else list(corpus.label_set),
            test_fraction=cfg.test_fraction,
            n_seed=cfg.n_seed,
            batch_size=cfg.batch_size,
            max_rounds=cfg.max_rounds,
            strategy=cfg.strategy,
            rng_seed=cfg.rng_seed,
            train=TrainConfig(
                learning_rate=cfg.train.learning_rate,
                max_epochs=cfg.train.max_epochs,
                loss_tolerance=cfg.train.loss_tolerance,
                l2_lambda=cfg.train.l2_lambda,
            ),
            stop_f1_threshold=cfg.stop_f1_threshold,
        )
        state = create_session(corpus, session_config)
        session_id = uuid.uuid4().hex[:12]
        store.put_session(session_id, state)
        return CreateSessionResponse(session_id=session_id)

    def _load_session_or_404(session_id: str) -> SessionState | JSONResponse:
        state = store.get_session(session_id)
        if state is None:
            return _error(404, f"unknown session {session_id}")
        return state

    @app.get("/sessions/{session_id}", response_model=SessionSummary)
    def get_session(session_id: str):
        state = _load_session_or_404(session_id)
        if isinstance(state, JSONResponse):
            return state
        return SessionSummary(
            session_id=session_id,
            phase=state.phase.value,
            round=state.round,
            n_labeled=state.n_labeled(),
            n_pool=len(state.pool_ids()),
            n_test=len(state.test_ids),
            label_set=list(state.config.label_set),
        )

    @app.get("/sessions/{session_id}/next-batch", response_model=NextBatchResponse)
    def get_next_batch(session_id: str):
        state = _load_session_or_404(session_id)
        if isinstance(state, JSONResponse):
            return state
        if state.phase not in (Phase.AWAITING_SEED_LABELS, Phase.AWAITING_BATCH_LABELS):
            return _error(409, f"no batch available in phase {state.phase.value}")
        round_no, _ids, docs = next_batch(state)
        return NextBatchResponse(
            round=round_no, items=[BatchItem(id=doc.id, text=doc.text) for doc in docs]
        )

    @app.post("/sessions/{session_id}/labels", response_model=SubmitLabelsResponse)
    def post_labels(session_id: str, body: SubmitLabelsRequest):
        state = _load_session_or_404(session_id)
        if isinstance(state, JSONResponse):
            return state
        with store.session_lock(session_id):
            try:
                record = submit_labels(state, body.labels)
                store.put_session(session_id, state)
            except SessionError as exc:
                # Validation failures leave the state untouched.
                return _error(400, str(exc))
            except Exception:
                # Persistence failed after mutation: drop the cache so the
                # next read reloads the last durable state from disk.
                store.drop_cached_session(session_id)
                raise
        return SubmitLabelsResponse(
            phase=state.phase.value,
            round_completed=record is not None,
            metrics=RoundRecordModel.from_record(record) if record is not None else None,
        )

    @app.get("/sessions/{session_id}/history", response_model=HistoryResponse)
    def get_history(session_id: str):
        state = _load_session_or_404(session_id)
        if isinstance(state, JSONResponse):
            return state
        return HistoryResponse(rounds=[RoundRecordModel.from_record(r) for r in state.history])

    @app.get("/sessions/{session_id}/history.csv")
    def get_history_csv(session_id: str):
        state = _load_session_or_404(session_id)
        if isinstance(state, JSONResponse):
            return state
        if not state.history:
            return _error(409, "empty history")
        data = export_history(state.history, label_order=list(state.config.label_set))
        return Response(content=data, media_type="text/csv")

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service until interrupted; sessions persist on shutdown."""
    import uvicorn

    data_dir = Path(config.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    probe = data_dir / ".write-probe"
    try:
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise SessionError(f"data directory {data_dir} is not writable: {exc}") from exc

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
