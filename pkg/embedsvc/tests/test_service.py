from __future__ import annotations

import numpy as np
import pytest
from fastapi.testclient import TestClient

from embedsvc.app import create_app
from embedsvc.encoder import TinyTransformerEncoder


@pytest.fixture()
def client():
    return TestClient(create_app(encoder=TinyTransformerEncoder(seed=0, dim=32), max_chars=200))


class TestHealth:
    def test_health_reports_model(self, client):
        reply = client.get("/health")
        assert reply.status_code == 200
        body = reply.json()
        assert body["status"] == "ok"
        assert body["model_id"].startswith("tiny-transformer-")


class TestEmbed:
    def test_identical_text_identical_vectors(self, client):
        a = client.post("/embed", json={"texts": ["the same text"]}).json()["vectors"]
        b = client.post("/embed", json={"texts": ["the same text"]}).json()["vectors"]
        assert a == b

    def test_empty_list_is_200_with_empty_vectors(self, client):
        reply = client.post("/embed", json={"texts": []})
        assert reply.status_code == 200
        assert reply.json()["vectors"] == []

    def test_unit_norms_and_length_preserved(self, client):
        texts = ["one", "two words here", "a third, longer text about sleep"]
        body = client.post("/embed", json={"texts": texts}).json()
        vectors = np.asarray(body["vectors"])
        assert vectors.shape == (3, body["dim"])
        norms = np.linalg.norm(vectors, axis=1)
        assert np.all(np.abs(norms - 1.0) < 1e-6)

    def test_distinct_texts_distinct_vectors(self, client):
        body = client.post("/embed", json={"texts": ["calm morning", "racing thoughts"]}).json()
        v = np.asarray(body["vectors"])
        assert not np.allclose(v[0], v[1])

    def test_oversize_text_is_413_with_limit(self, client):
        reply = client.post("/embed", json={"texts": ["x" * 500]})
        assert reply.status_code == 413
        assert reply.json()["max_chars"] == 200

    def test_deterministic_across_instances_same_seed(self):
        first = TestClient(create_app(encoder=TinyTransformerEncoder(seed=3, dim=32)))
        second = TestClient(create_app(encoder=TinyTransformerEncoder(seed=3, dim=32)))
        a = first.post("/embed", json={"texts": ["stable"]}).json()
        b = second.post("/embed", json={"texts": ["stable"]}).json()
        assert a["vectors"] == b["vectors"]
        assert a["model_id"] == b["model_id"]

    def test_different_seed_different_model(self):
        first = TestClient(create_app(encoder=TinyTransformerEncoder(seed=1, dim=32)))
        second = TestClient(create_app(encoder=TinyTransformerEncoder(seed=2, dim=32)))
        a = first.post("/embed", json={"texts": ["stable"]}).json()
        b = second.post("/embed", json={"texts": ["stable"]}).json()
        assert a["model_id"] != b["model_id"]
        assert a["vectors"] != b["vectors"]

    def test_rejects_malformed_body(self, client):
        assert client.post("/embed", json={"oops": 1}).status_code == 422


class TestComplete:
    def test_seed_determinism(self, client):
        payload = {"prompt": "say something", "seed": 9}
        a = client.post("/complete", json=payload).json()["text"]
        b = client.post("/complete", json=payload).json()["text"]
        assert a == b

    def test_seed_changes_reply(self, client):
        a = client.post("/complete", json={"prompt": "say something", "seed": 1}).json()["text"]
        b = client.post("/complete", json={"prompt": "say something", "seed": 2}).json()["text"]
        assert a != b

    def test_empathy_marker_reply_is_parseable_format(self, client):
        prompt = (
            "You are an evaluator...\n"
            "<t1> Interpretation: X, Emotional Reaction: Y, Exploration: Z </t1>\n"
            "Seeker post: I feel on edge.\nSupporter response: that is rough."
        )
        text = client.post("/complete", json={"prompt": prompt, "seed": 4}).json()["text"]
        assert text.startswith("<t1> Interpretation: ")
        assert text.endswith("</t1>")

    def test_oversize_prompt_is_413(self, client):
        reply = client.post("/complete", json={"prompt": "y" * 500})
        assert reply.status_code == 413
        assert reply.json()["max_chars"] == 200


class TestEncoder:
    def test_encode_shapes_and_norms(self):
        encoder = TinyTransformerEncoder(seed=0, dim=48)
        matrix = encoder.encode(["alpha", "beta", ""])
        assert matrix.shape == (3, 48)
        assert np.allclose(np.linalg.norm(matrix, axis=1), 1.0, atol=1e-9)

    def test_empty_batch(self):
        assert TinyTransformerEncoder(seed=0, dim=16).encode([]).shape == (0, 16)

    def test_bitwise_determinism(self):
        a = TinyTransformerEncoder(seed=7, dim=32).encode(["same input text"])
        b = TinyTransformerEncoder(seed=7, dim=32).encode(["same input text"])
        assert np.array_equal(a, b)
