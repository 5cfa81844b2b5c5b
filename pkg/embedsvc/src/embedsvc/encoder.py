"""Text encoders behind the /embed endpoint.

The default backend is a small numpy transformer encoder whose weights
are drawn once from a seeded counter-based generator: no downloads, no
GPU, and byte-identical vectors for identical inputs across platforms.
Set EMBEDSVC_MODEL to a sentence-transformers model name to serve real
learned embeddings instead (weights must already be available locally).
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

_TOKEN_RE = re.compile(r"[^\W_]+(?:['’-][^\W_]+)*", re.UNICODE)

DEFAULT_DIM = 64
DEFAULT_LAYERS = 2
VOCAB_BUCKETS = 4096
MAX_TOKENS = 256


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _layer_norm(x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + eps)


def _token_bucket(token: str) -> int:
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big") % VOCAB_BUCKETS


class TinyTransformerEncoder:
    """Two-layer single-head transformer with hashed token embeddings.

    Weights are fixed at construction from the seed; the forward pass is
    pure float64 numpy, so identical text always produces an identical
    unit-norm vector.
    """

    def __init__(self, seed: int = 0, dim: int = DEFAULT_DIM, layers: int = DEFAULT_LAYERS) -> None:
        self.seed = seed
        self.dim = dim
        self.model_id = f"tiny-transformer-seed{seed}-d{dim}"
        rng = np.random.Generator(np.random.Philox(key=seed))
        scale = 1.0 / np.sqrt(dim)
        self.embedding = rng.normal(0.0, 1.0, size=(VOCAB_BUCKETS, dim))
        self.layers = []
        for _ in range(layers):
            self.layers.append(
                {
                    "wq": rng.normal(0.0, scale, size=(dim, dim)),
                    "wk": rng.normal(0.0, scale, size=(dim, dim)),
                    "wv": rng.normal(0.0, scale, size=(dim, dim)),
                    "wo": rng.normal(0.0, scale, size=(dim, dim)),
                    "w1": rng.normal(0.0, scale, size=(dim, 2 * dim)),
                    "b1": np.zeros(2 * dim),
                    "w2": rng.normal(0.0, scale, size=(2 * dim, dim)),
                    "b2": np.zeros(dim),
                }
            )
        positions = np.arange(MAX_TOKENS)[:, None]
        freqs = np.exp(-np.log(10000.0) * (np.arange(dim)[None, :] // 2 * 2) / dim)
        angle = positions * freqs
        self.positional = np.where(np.arange(dim)[None, :] % 2 == 0, np.sin(angle), np.cos(angle))

    def _tokens(self, text: str) -> list[int]:
        tokens = [_token_bucket(t.lower()) for t in _TOKEN_RE.findall(text)]
        # bucket 0 doubles as a start-of-text token so empty inputs still embed
        return ([0] + tokens)[:MAX_TOKENS]

    def _forward(self, token_ids: list[int]) -> np.ndarray:
        x = self.embedding[token_ids] + self.positional[: len(token_ids)]
        for layer in self.layers:
            q = x @ layer["wq"]
            k = x @ layer["wk"]
            v = x @ layer["wv"]
            attention = _softmax(q @ k.T / np.sqrt(self.dim)) @ v @ layer["wo"]
            x = _layer_norm(x + attention)
            hidden = np.maximum(x @ layer["w1"] + layer["b1"], 0.0)
            x = _layer_norm(x + hidden @ layer["w2"] + layer["b2"])
        pooled = x.mean(axis=0)
        return pooled / np.linalg.norm(pooled)

    def encode(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.empty((0, self.dim))
        return np.vstack([self._forward(self._tokens(t)) for t in texts])


class SentenceTransformerEncoder:
    """Optional learned backend; requires sentence-transformers and a
    locally available model."""

    def __init__(self, model_name: str) -> None:
        from sentence_transformers import SentenceTransformer

        self._model = SentenceTransformer(model_name)
        self.dim = self._model.get_sentence_embedding_dimension()
        self.model_id = f"sentence-transformers/{model_name.split('/')[-1]}"

    def encode(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.empty((0, self.dim))
        vectors = np.asarray(self._model.encode(texts, normalize_embeddings=True), dtype=float)
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        return vectors / norms


def deterministic_completion(prompt: str, seed: int, model_id: str, max_tokens: int) -> str:
    """Rule-based stand-in completion: stable for a fixed (prompt, seed).

    Prompts carrying the empathy-rubric marker get a reply in the
    required scoring format so judge parsing works end to end; anything
    else gets a short templated acknowledgment.
    """
    digest = hashlib.sha256(f"{seed}|{prompt}".encode("utf-8")).digest()
    if "<t1> Interpretation:" in prompt:
        x, y, z = digest[0] % 3, digest[1] % 3, digest[2] % 3
        return f"<t1> Interpretation: {x}, Emotional Reaction: {y}, Exploration: {z} </t1>"
    words = prompt.split()
    echo = " ".join(words[: min(8, len(words), max(1, max_tokens))])
    return f"[{model_id}] ack {digest[:4].hex()}: {echo}"
