"""HTTP surface: POST /embed, POST /complete, GET /health.

Wire contract:
  /embed    {"texts": [str]} -> {"dim": int, "vectors": [[float]], "model_id": str}
  /complete {"prompt": str, "temperature"?: float, "max_tokens"?: int,
             "seed"?: int} -> {"text": str}
  /health   -> {"status": "ok", "model_id": str}

Inputs longer than the per-text character limit are refused with 413
and the limit echoed in the body. The model is loaded once at startup;
request handling is stateless.

Environment:
  EMBEDSVC_MODEL      sentence-transformers model name (optional)
  EMBEDSVC_SEED       seed for the built-in encoder (default 0)
  EMBEDSVC_DIM        dimension of the built-in encoder (default 64)
  EMBEDSVC_MAX_CHARS  per-text character limit (default 8000)
  EMBEDSVC_PORT       listen port for `python -m embedsvc` (default 8901)
"""

from __future__ import annotations

import logging
import os

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .encoder import (
    DEFAULT_DIM,
    SentenceTransformerEncoder,
    TinyTransformerEncoder,
    deterministic_completion,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_CHARS = 8000


class EmbedRequest(BaseModel):
    texts: list[str]


class CompleteRequest(BaseModel):
    prompt: str
    temperature: float = 1.0
    max_tokens: int = Field(default=256, ge=1)
    seed: int = 0


def build_encoder():
    model_name = os.environ.get("EMBEDSVC_MODEL")
    if model_name:
        logger.info("loading sentence-transformers model %s", model_name)
        return SentenceTransformerEncoder(model_name)
    seed = int(os.environ.get("EMBEDSVC_SEED", "0"))
    dim = int(os.environ.get("EMBEDSVC_DIM", str(DEFAULT_DIM)))
    return TinyTransformerEncoder(seed=seed, dim=dim)


def create_app(encoder=None, max_chars: int | None = None) -> FastAPI:
    encoder = encoder if encoder is not None else build_encoder()
    limit = max_chars if max_chars is not None else int(
        os.environ.get("EMBEDSVC_MAX_CHARS", str(DEFAULT_MAX_CHARS))
    )
    app = FastAPI(title="embedsvc", version="0.1.0")

    def oversize(texts: list[str]) -> JSONResponse | None:
        for i, text in enumerate(texts):
            if len(text) > limit:
                return JSONResponse(
                    status_code=413,
                    content={
                        "error": f"text {i} exceeds the per-text limit",
                        "max_chars": limit,
                    },
                )
        return None

    @app.get("/health")
    def health():
        return {"status": "ok", "model_id": encoder.model_id}

    @app.post("/embed")
    def embed(request: EmbedRequest):
        refusal = oversize(request.texts)
        if refusal is not None:
            return refusal
        vectors = encoder.encode(request.texts)
        return {
            "dim": encoder.dim,
            "vectors": [row.tolist() for row in vectors],
            "model_id": encoder.model_id,
        }

    @app.post("/complete")
    def complete(request: CompleteRequest):
        refusal = oversize([request.prompt])
        if refusal is not None:
            return refusal
        text = deterministic_completion(
            request.prompt, request.seed, encoder.model_id, request.max_tokens
        )
        return {"text": text, "model_id": encoder.model_id}

    return app
