import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from embed_backend.service import BackendConfig, create_app

FIXTURES = Path(__file__).resolve().parents[2] / "fixtures" / "hash_embed_fixtures.json"


@pytest.fixture()
def client():
    app = create_app(BackendConfig(model="dummy:16"))
    with TestClient(app) as test_client:
        yield test_client


def test_healthz(client):
    response = client.get("/healthz")
    assert response.status_code == 200
    assert response.text == "ok"


def test_embed_two_texts_two_rows(client):
    response = client.post("/embed", json={"texts": ["a", "b"]})
    assert response.status_code == 200
    rows = response.json()["embeddings"]
    assert len(rows) == 2
    assert all(len(row) == 16 for row in rows)


def test_embed_missing_texts_is_400(client):
    response = client.post("/embed", json={})
    assert response.status_code == 400
    assert response.json() == {"error": "missing texts"}


def test_embed_rejects_non_string_entries(client):
    response = client.post("/embed", json={"texts": ["ok", 5]})
    assert response.status_code == 400
    assert "error" in response.json()


def test_embed_rejects_empty_list(client):
    response = client.post("/embed", json={"texts": []})
    assert response.status_code == 400


def test_embed_rejects_invalid_json(client):
    response = client.post(
        "/embed", content=b"{broken", headers={"content-type": "application/json"}
    )
    assert response.status_code == 400
    assert "error" in response.json()


def test_text_count_over_limit_is_protocol_error():
    app = create_app(BackendConfig(model="dummy:8", max_texts=3))
    with TestClient(app) as client:
        response = client.post("/embed", json={"texts": ["x"] * 4})
        assert response.status_code == 413
        assert "error" in response.json()


def test_repeated_identical_request_returns_identical_bytes(client):
    body = {"texts": ["the death penalty", "framing analysis"]}
    first = client.post("/embed", json=body)
    second = client.post("/embed", json=body)
    assert first.content == second.content


def test_response_schema_matches_wire_protocol(client):
    """Shape contract consumed by the annotation engine's client."""
    response = client.post("/embed", json={"texts": ["alpha", "beta gamma"]})
    payload = response.json()
    assert set(payload) == {"embeddings"}
    assert isinstance(payload["embeddings"], list)
    for row in payload["embeddings"]:
        assert isinstance(row, list)
        assert all(isinstance(v, float) for v in row)


def test_dummy_mode_matches_primary_fixtures_bit_exact(client):
    """Backend conformance: dummy responses equal the engine's built-in embedder."""
    payload = json.loads(FIXTURES.read_text(encoding="utf-8"))
    texts = [case["text"] for case in payload["cases"]]
    response = client.post("/embed", json={"texts": texts})
    assert response.status_code == 200
    rows = response.json()["embeddings"]
    for case, row in zip(payload["cases"], rows):
        assert row == case["embedding"], case["text"]
