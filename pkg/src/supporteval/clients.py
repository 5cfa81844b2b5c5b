"""Typed clients for the three external scorers (toxicity, embeddings,
completions), plus deterministic in-process mocks.

All HTTP clients share one fetch path: disk cache -> single-flight ->
token-bucket rate limit -> bounded retries with exponential backoff
(base * 2^attempt plus jitter bounded by base). Mocks are first-class
and make the whole harness runnable offline.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import random
import threading
import time
from dataclasses import dataclass

import httpx
import numpy as np

from .safety import TOXICITY_ATTRIBUTES, ToxicityScores
from .semantic import EmbeddingMatrix

logger = logging.getLogger(__name__)

TOXICITY_WIRE_ATTRIBUTES = {
    "toxicity": "TOXICITY",
    "severe_toxicity": "SEVERE_TOXICITY",
    "identity_attack": "IDENTITY_ATTACK",
    "insult": "INSULT",
    "profanity": "PROFANITY",
    "threat": "THREAT",
}

_RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class BackendError(Exception):
    """Base class for scorer-backend failures."""


class BackendReplyError(BackendError):
    """The backend answered but the reply is unusable."""


class BackendUnavailable(BackendError):
    """All attempts exhausted (or network use forbidden)."""


@dataclass(frozen=True)
class ScorerEndpoint:
    """Connection settings for one external scorer."""

    base_url: str
    auth_env: str | None = None
    timeout: float = 10.0
    max_retries: int = 3
    rate_limit_per_min: int = 60
    backoff_base: float = 0.5

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if not 1 <= self.max_retries <= 5:
            raise ValueError("max_retries must be between 1 and 5 attempts")

    def api_key(self) -> str | None:
        return os.environ.get(self.auth_env) if self.auth_env else None


def request_key(kind: str, payload: dict) -> str:
    """Stable cache key: sha256 of the canonical request form."""
    canonical = json.dumps({"kind": kind, "payload": payload}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class CacheEntry:
    key: str
    payload: bytes
    created_at: float


class DiskCache:
    """Content-addressed byte store; reruns with a warm cache are free."""

    def __init__(self, directory: str) -> None:
        self.directory = directory
        os.makedirs(directory, exist_ok=True)

    def _path(self, key: str) -> str:
        return os.path.join(self.directory, f"{key}.bin")

    def get(self, key: str) -> bytes | None:
        try:
            with open(self._path(key), "rb") as fh:
                return fh.read()
        except FileNotFoundError:
            return None

    def put(self, key: str, payload: bytes) -> CacheEntry:
        path = self._path(key)
        tmp = f"{path}.tmp.{os.getpid()}.{threading.get_ident()}"
        with open(tmp, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
        return CacheEntry(key=key, payload=payload, created_at=time.time())


class MemoryCache:
    """Dict-backed stand-in with the DiskCache interface."""

    def __init__(self) -> None:
        self._store: dict[str, bytes] = {}
        self._lock = threading.Lock()

    def get(self, key: str) -> bytes | None:
        with self._lock:
            return self._store.get(key)

    def put(self, key: str, payload: bytes) -> CacheEntry:
        with self._lock:
            self._store[key] = payload
        return CacheEntry(key=key, payload=payload, created_at=time.time())


class TokenBucket:
    """Simple token bucket; acquire() blocks until a token is available."""

    def __init__(self, rate_per_min: int, clock=time.monotonic, sleeper=time.sleep) -> None:
        if rate_per_min <= 0:
            raise ValueError("rate_per_min must be positive")
        self.rate_per_sec = rate_per_min / 60.0
        self.capacity = float(rate_per_min)
        self._tokens = self.capacity
        self._clock = clock
        self._sleeper = sleeper
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate_per_sec)
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate_per_sec
            self._sleeper(wait)


class _SingleFlight:
    """One in-flight computation per key; concurrent callers wait and reuse."""

    def __init__(self) -> None:
        self._locks: dict[str, threading.Lock] = {}
        self._master = threading.Lock()

    def lock_for(self, key: str) -> threading.Lock:
        with self._master:
            lock = self._locks.get(key)
            if lock is None:
                lock = self._locks[key] = threading.Lock()
            return lock


class _HttpScorerClient:
    """Shared transport machinery for the concrete HTTP clients."""

    def __init__(
        self,
        endpoint: ScorerEndpoint,
        cache: DiskCache | MemoryCache | None = None,
        transport: httpx.BaseTransport | None = None,
        offline: bool = False,
        sleeper=time.sleep,
        jitter_rng: random.Random | None = None,
        max_concurrency: int = 4,
    ) -> None:
        self.endpoint = endpoint
        self.cache = cache if cache is not None else MemoryCache()
        self.offline = offline
        self.retry_count = 0
        self._sleeper = sleeper
        self._jitter = jitter_rng if jitter_rng is not None else random.Random()
        self._flight = _SingleFlight()
        self._bucket = TokenBucket(endpoint.rate_limit_per_min, sleeper=sleeper)
        self._semaphore = threading.Semaphore(max_concurrency)
        self._http = httpx.Client(timeout=endpoint.timeout, transport=transport)

    def close(self) -> None:
        self._http.close()

    def _fetch(self, key: str, method: str, url: str, body: dict) -> bytes:
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        with self._flight.lock_for(key):
            cached = self.cache.get(key)
            if cached is not None:
                return cached
            if self.offline:
                raise BackendUnavailable(f"offline mode: cache miss for {url}")
            payload = self._request_with_retries(method, url, body)
            self.cache.put(key, payload)
            return payload

    def _request_with_retries(self, method: str, url: str, body: dict) -> bytes:
        last_error: Exception | None = None
        for attempt in range(self.endpoint.max_retries):
            if attempt > 0:
                self.retry_count += 1
                base = self.endpoint.backoff_base
                self._sleeper(base * 2 ** (attempt - 1) + self._jitter.uniform(0.0, base))
            try:
                with self._semaphore:
                    self._bucket.acquire()
                    response = self._http.request(method, url, json=body)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code == 200:
                return response.content
            if response.status_code in _RETRYABLE_STATUS:
                last_error = BackendError(f"status {response.status_code} from {url}")
                continue
            raise BackendReplyError(f"status {response.status_code} from {url}: {response.text[:200]}")
        raise BackendUnavailable(f"{url} failed after {self.endpoint.max_retries} attempts: {last_error}")


class HttpEmbeddingClient(_HttpScorerClient):
    """POST {texts} -> {dim, vectors, model_id}; rows are unit-normalized.

    Vectors are cached per text, so only cache misses hit the network.
    A dimension change between calls is a fatal configuration error.
    """

    def __init__(self, endpoint: ScorerEndpoint, **kwargs) -> None:
        super().__init__(endpoint, **kwargs)
        self._dim: int | None = None

    def _key(self, text: str) -> str:
        return request_key("embed", {"url": self.endpoint.base_url, "text": text})

    def embed(self, texts: list[str]) -> EmbeddingMatrix:
        rows: dict[int, np.ndarray] = {}
        misses: list[tuple[int, str]] = []
        for i, text in enumerate(texts):
            cached = self.cache.get(self._key(text))
            if cached is not None:
                rows[i] = np.asarray(json.loads(cached.decode("utf-8")), dtype=float)
            else:
                misses.append((i, text))
        if misses:
            body = {"texts": [t for _, t in misses]}
            key = request_key("embed_batch", {"url": self.endpoint.base_url, "texts": body["texts"]})
            payload = self._fetch(key, "POST", self.endpoint.base_url, body)
            reply = self._parse_reply(payload, expected=len(misses))
            for (i, text), vector in zip(misses, reply):
                rows[i] = vector
                self.cache.put(self._key(text), json.dumps(vector.tolist()).encode("utf-8"))
        if not texts:
            dim = self._dim if self._dim is not None else 0
            return EmbeddingMatrix(values=np.empty((0, dim)), unit_norm=True)
        matrix = np.vstack([rows[i] for i in range(len(texts))])
        self._check_dim(matrix.shape[1])
        return EmbeddingMatrix(values=matrix, unit_norm=True)

    def _parse_reply(self, payload: bytes, expected: int) -> list[np.ndarray]:
        try:
            data = json.loads(payload.decode("utf-8"))
            vectors = [np.asarray(v, dtype=float) for v in data["vectors"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise BackendReplyError(f"malformed embedding reply: {exc}") from exc
        if len(vectors) != expected:
            raise BackendReplyError(f"embedding reply length {len(vectors)} != request {expected}")
        out = []
        for v in vectors:
            norm = float(np.linalg.norm(v))
            if not math.isfinite(norm) or norm == 0.0:
                raise BackendReplyError("embedding reply contains a zero or non-finite vector")
            out.append(v / norm)
        return out

    def _check_dim(self, dim: int) -> None:
        if self._dim is None:
            self._dim = dim
        elif self._dim != dim:
            raise BackendReplyError(f"embedding dimension drift: {self._dim} -> {dim}")


class HttpCompletionClient(_HttpScorerClient):
    """POST {prompt, temperature, max_tokens, seed} -> {text}."""

    def complete(
        self,
        prompt: str,
        temperature: float = 1.0,
        max_tokens: int = 256,
        seed: int = 0,
    ) -> str:
        body = {"prompt": prompt, "temperature": temperature, "max_tokens": max_tokens, "seed": seed}
        key = request_key("complete", {"url": self.endpoint.base_url, **body})
        payload = self._fetch(key, "POST", self.endpoint.base_url, body)
        try:
            return json.loads(payload.decode("utf-8"))["text"]
        except (ValueError, KeyError, TypeError) as exc:
            raise BackendReplyError(f"malformed completion reply: {exc}") from exc


class HttpToxicityClient(_HttpScorerClient):
    """Perspective-compatible wire shape.

    Request: {"comment": {"text": ...}, "requestedAttributes":
    {"TOXICITY": {}, ...}}; response carries one
    {"summaryScore": {"value": v}} per attribute. The API key, when
    configured, is passed as the ``key`` query parameter.
    """

    def analyze_toxicity(self, text: str) -> ToxicityScores:
        body = {
            "comment": {"text": text},
            "requestedAttributes": {wire: {} for wire in TOXICITY_WIRE_ATTRIBUTES.values()},
        }
        url = self.endpoint.base_url
        api_key = self.endpoint.api_key()
        if api_key:
            url = f"{url}?key={api_key}"
        key = request_key("toxicity", {"url": self.endpoint.base_url, "text": text})
        payload = self._fetch(key, "POST", url, body)
        try:
            data = json.loads(payload.decode("utf-8"))
            scores = {
                attr: float(data["attributeScores"][wire]["summaryScore"]["value"])
                for attr, wire in TOXICITY_WIRE_ATTRIBUTES.items()
            }
        except (ValueError, KeyError, TypeError) as exc:
            raise BackendReplyError(f"malformed toxicity reply: {exc}") from exc
        return ToxicityScores(**scores)


def _digest_rng(*parts: object) -> np.random.Generator:
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode("utf-8")).digest()
    return np.random.Generator(np.random.Philox(key=int.from_bytes(digest[:16], "big")))


def _digest_floats(n: int, *parts: object) -> np.ndarray:
    return _digest_rng(*parts).random(n)


class MockEmbeddingClient:
    """Deterministic unit-norm embeddings derived from a text hash."""

    def __init__(self, dim: int = 16, seed: int = 0) -> None:
        if dim < 2:
            raise ValueError("dim must be >= 2")
        self.dim = dim
        self.seed = seed
        self.backend_calls = 0
        self._memo: dict[str, np.ndarray] = {}

    def _vector(self, text: str) -> np.ndarray:
        row = self._memo.get(text)
        if row is None:
            self.backend_calls += 1
            raw = _digest_rng("embed", self.seed, self.dim, text).standard_normal(self.dim)
            row = self._memo[text] = raw / np.linalg.norm(raw)
        return row

    def embed(self, texts: list[str]) -> EmbeddingMatrix:
        if not texts:
            return EmbeddingMatrix(values=np.empty((0, self.dim)), unit_norm=True)
        return EmbeddingMatrix(values=np.vstack([self._vector(t) for t in texts]), unit_norm=True)


EMPATHY_REPLY_TEMPLATE = "<t1> Interpretation: {x}, Emotional Reaction: {y}, Exploration: {z} </t1>"


class MockCompletionClient:
    """Deterministic completion backend replying in the empathy format.

    With varied=False every reply is the fixed (1, 1, 1) line; with
    varied=True the three scores are derived from a prompt hash, which
    gives the statistics engine non-degenerate samples.
    """

    def __init__(self, seed: int = 0, varied: bool = False) -> None:
        self.seed = seed
        self.varied = varied
        self.backend_calls = 0

    def complete(
        self,
        prompt: str,
        temperature: float = 1.0,
        max_tokens: int = 256,
        seed: int = 0,
    ) -> str:
        self.backend_calls += 1
        if not self.varied:
            return EMPATHY_REPLY_TEMPLATE.format(x=1, y=1, z=1)
        u = _digest_floats(3, "complete", self.seed, seed, prompt)
        x, y, z = (min(int(v * 3), 2) for v in u)
        return EMPATHY_REPLY_TEMPLATE.format(x=x, y=y, z=z)


class MockToxicityClient:
    """Deterministic toxicity scores from a text hash, skewed low."""

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed
        self.backend_calls = 0

    def analyze_toxicity(self, text: str) -> ToxicityScores:
        self.backend_calls += 1
        u = _digest_floats(len(TOXICITY_ATTRIBUTES), "toxicity", self.seed, text)
        return ToxicityScores(**{attr: float(v) ** 3 for attr, v in zip(TOXICITY_ATTRIBUTES, u)})


class StaticToxicityClient:
    """Fixed reply client for tests and docs."""

    def __init__(self, scores: ToxicityScores) -> None:
        self.scores = scores
        self.backend_calls = 0

    def analyze_toxicity(self, text: str) -> ToxicityScores:
        self.backend_calls += 1
        return self.scores


class MockPairScorer:
    """Deterministic quality-regressor stand-in with memoized replies.

    Scores land in [-1.5, 0.5]; identical text pairs return 1.0,
    matching the usual behavior of learned regression scorers on exact
    matches.
    """

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed
        self.backend_calls = 0
        self._memo: dict[tuple[str, str], float] = {}

    def score_pair(self, candidate: str, reference: str) -> float:
        pair = (candidate, reference)
        if pair not in self._memo:
            self.backend_calls += 1
            if candidate == reference:
                self._memo[pair] = 1.0
            else:
                u = float(_digest_floats(1, "pair", self.seed, candidate, reference)[0])
                self._memo[pair] = -1.5 + 2.0 * u
        return self._memo[pair]


class StaticPairScorer:
    """Fixed scalar reply; counts backend calls but never caches."""

    def __init__(self, value: float) -> None:
        self.value = value
        self.backend_calls = 0

    def score_pair(self, candidate: str, reference: str) -> float:
        self.backend_calls += 1
        return self.value


class CompletionPairScorer:
    """Route pair scoring through the completion client.

    The prompt wraps both texts in a fixed template and the reply's
    first float is the score; caching rides on the completion client.
    """

    PROMPT_TEMPLATE = "Score the candidate against the reference; reply with one number.\ncandidate: {candidate}\nreference: {reference}"

    def __init__(self, client) -> None:
        self.client = client

    def score_pair(self, candidate: str, reference: str) -> float:
        reply = self.client.complete(
            self.PROMPT_TEMPLATE.format(candidate=candidate, reference=reference),
            temperature=0.0,
        )
        for token in reply.split():
            try:
                return float(token)
            except ValueError:
                continue
        raise BackendReplyError(f"no numeric score in reply: {reply[:200]}")
