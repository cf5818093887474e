"""FastAPI application exposing the embedding wire contract.

Endpoints:
  POST /embed   {texts, granularity} -> {dimension, vectors[, tokens]}
  GET  /info    -> {sentence_model, token_model, dimension, max_text_length}
  GET  /healthz -> {status: ok}

Sentence granularity returns one vector per text; token granularity returns
one vector per token per text plus the token strings, so callers can align
greedy matching with the encoder's own tokenization. The service is
stateless; identical requests produce identical vectors.

A shared auth token is enforced on /embed when EMBED_AUTH_TOKEN is set:
requests must carry it in the X-Auth-Token header.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, Header, HTTPException
from pydantic import BaseModel, Field

from .encoders import EncoderConfig, build_encoders


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1)
    granularity: str


def create_app(config: EncoderConfig | None = None) -> FastAPI:
    config = config or EncoderConfig.from_env()
    sentence_encoder, token_encoder = build_encoders(config)
    auth_token = os.environ.get("EMBED_AUTH_TOKEN", "")

    app = FastAPI(title="embed-service")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/info")
    def info():
        return {
            "sentence_model": config.sentence_model,
            "token_model": config.token_model,
            "dimension": config.dimension,
            "max_text_length": config.max_text_length,
        }

    @app.post("/embed")
    def embed(request: EmbedRequest, x_auth_token: str = Header(default="")):
        if auth_token and x_auth_token != auth_token:
            raise HTTPException(status_code=401, detail="missing or wrong X-Auth-Token")
        for position, text in enumerate(request.texts):
            if len(text) > config.max_text_length:
                raise HTTPException(
                    status_code=413,
                    detail=(
                        f"texts[{position}] has {len(text)} characters; "
                        f"the cap is {config.max_text_length}"
                    ),
                )
        if request.granularity == "sentence":
            vectors = sentence_encoder.encode_sentences(request.texts)
            return {"dimension": config.dimension, "vectors": vectors.tolist()}
        if request.granularity == "token":
            tokens, vectors = token_encoder.encode_tokens(request.texts)
            return {
                "dimension": config.dimension,
                "vectors": [v.tolist() for v in vectors],
                "tokens": tokens,
            }
        raise HTTPException(
            status_code=400,
            detail=f"unknown granularity '{request.granularity}' (use sentence or token)",
        )

    return app


def serve() -> None:
    import uvicorn

    host = os.environ.get("EMBED_HOST", "127.0.0.1")
    port = int(os.environ.get("EMBED_PORT", "8901"))
    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    serve()
