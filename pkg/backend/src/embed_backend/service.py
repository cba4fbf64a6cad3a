"""The /embed wire protocol service.

    POST /embed  {"texts": [str, ...]}
      -> 200 {"embeddings": [[number, ...], ...]}   one row per text, in order
      -> non-200 {"error": str}

Stateless between requests; dummy mode ("dummy:<dim>") needs no model
download and is byte-deterministic, so repeated identical requests return
identical responses.
"""

from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .hashing import hash_embed


@dataclass
class BackendConfig:
    """Model selection and serving limits; "dummy:<dim>" avoids any download."""

    model: str = "dummy:64"
    max_seq_len: int = 4096
    device: str = "cpu"
    host: str = "127.0.0.1"
    port: int = 8800
    max_texts: int = 1024
    salt: int = 0

    def __post_init__(self) -> None:
        if not (1 <= self.port <= 65535):
            raise ValueError(f"port must be in [1, 65535], got {self.port}")
        if self.max_texts < 1:
            raise ValueError("max_texts must be positive")
        if self.model.startswith("dummy:"):
            dim = self.dummy_dim()
            if dim < 1:
                raise ValueError(f"dummy dimension must be >= 1, got {dim}")

    def dummy_dim(self) -> int:
        return int(self.model.split(":", 1)[1])


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(config: BackendConfig) -> FastAPI:
    app = FastAPI(title="embed-backend")

    if config.model.startswith("dummy:"):
        dim = config.dummy_dim()
        embedder = lambda texts: [hash_embed(t, dim, config.salt) for t in texts]  # noqa: E731
    else:
        from .model import TransformerEmbedder

        transformer = TransformerEmbedder(config.model, config.max_seq_len, config.device)
        embedder = transformer.embed

    @app.get("/healthz", response_class=PlainTextResponse)
    def healthz() -> str:
        return "ok"

    @app.post("/embed")
    async def embed(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return _error(400, "body is not valid JSON")
        if not isinstance(payload, dict) or "texts" not in payload:
            return _error(400, "missing texts")
        texts = payload["texts"]
        if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
            return _error(400, "texts must be an array of strings")
        if not texts:
            return _error(400, "texts must be non-empty")
        if len(texts) > config.max_texts:
            return _error(413, f"text count {len(texts)} exceeds limit {config.max_texts}")
        vectors = embedder(texts)
        return {"embeddings": [[float(v) for v in vec] for vec in vectors]}

    return app


def serve(config: BackendConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="info")
