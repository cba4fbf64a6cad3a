"""HTTP client for the embedding-backend wire protocol.

The backend exposes one endpoint:

    POST {base}/embed  {"texts": [str, ...]}
      -> 200 {"embeddings": [[number, ...], ...]}
      -> non-200 {"error": str}

The client validates every response (one vector per text, order preserved,
finite components, one dimension across the whole client lifetime) and
retries transient failures (connection errors and 5xx responses) up to 3
times before giving up.
"""

import numpy as np

import httpx

from .errors import BackendError

TRANSIENT_RETRIES = 3


class BackendClient:
    """Client for one embedding backend; learns its dimension from the first response."""

    def __init__(
        self,
        base_url: str,
        timeout: float = 30.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.dim: int | None = None
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "BackendClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _post_embed(self, texts: list[str]) -> httpx.Response:
        last_error: Exception | None = None
        for _attempt in range(1 + TRANSIENT_RETRIES):
            try:
                response = self._client.post(f"{self.base_url}/embed", json={"texts": texts})
            except httpx.TransportError as exc:
                last_error = exc
                continue
            if response.status_code >= 500:
                last_error = BackendError(
                    f"backend error {response.status_code}: {_error_text(response)}"
                )
                continue
            return response
        raise BackendError(f"backend unreachable after {1 + TRANSIENT_RETRIES} attempts: {last_error}")

    def fetch_embeddings(self, texts: list[str]) -> list[np.ndarray]:
        """One embedding per text, in input order."""
        if not texts:
            raise ValueError("texts must be non-empty")
        response = self._post_embed(texts)
        if response.status_code != 200:
            raise BackendError(f"backend rejected request ({response.status_code}): {_error_text(response)}")
        try:
            payload = response.json()
        except ValueError as exc:
            raise BackendError(f"backend returned invalid JSON: {exc}") from exc
        rows = payload.get("embeddings") if isinstance(payload, dict) else None
        if not isinstance(rows, list):
            raise BackendError("backend response missing 'embeddings' array")
        if len(rows) != len(texts):
            raise BackendError(f"count mismatch: sent {len(texts)} texts, received {len(rows)} embeddings")

        vectors: list[np.ndarray] = []
        dim = self.dim
        for i, row in enumerate(rows):
            if not isinstance(row, list) or not row:
                raise BackendError(f"embedding {i} is not a non-empty array")
            vec = np.asarray(row, dtype=np.float64)
            if vec.ndim != 1 or not np.all(np.isfinite(vec)):
                raise BackendError(f"embedding {i} has non-finite or malformed components")
            if dim is None:
                dim = int(vec.size)
            elif vec.size != dim:
                raise BackendError(f"dimension drift: got {vec.size} after {dim}")
            vectors.append(vec)
        self.dim = dim
        return vectors

    def embed_in_batches(self, texts: list[str], batch_size: int = 64) -> list[np.ndarray]:
        """fetch_embeddings over chunks, order restored; for large corpora."""
        if batch_size < 1:
            raise ValueError("batch_size must be positive")
        vectors: list[np.ndarray] = []
        for start in range(0, len(texts), batch_size):
            vectors.extend(self.fetch_embeddings(texts[start : start + batch_size]))
        return vectors


def _error_text(response: httpx.Response) -> str:
    try:
        payload = response.json()
        if isinstance(payload, dict) and isinstance(payload.get("error"), str):
            return payload["error"]
    except ValueError:
        pass
    return response.text[:200]
