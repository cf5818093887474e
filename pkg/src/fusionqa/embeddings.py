"""Embedding providers: the HTTP wire client plus in-process stubs for offline runs.

Wire contract: HTTP POST ``{texts: [...], granularity: "sentence"|"token"}``
returning ``{dimension, vectors}`` where vectors is one vector per text for
sentence granularity, or one vector per token per text for token granularity
(token providers may also return the token strings).

A provider object carries its granularity; the metrics layer checks it.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from enum import Enum

from .tokenizers import ws_punct_tokens


class Granularity(Enum):
    SENTENCE = "sentence"
    TOKEN = "token"


@dataclass(frozen=True)
class EmbeddingProviderRef:
    """Descriptor of a remote embedding endpoint."""

    base_url: str
    granularity: Granularity
    dimension: int
    auth_env: str | None = None

    def __post_init__(self) -> None:
        if self.dimension <= 0:
            raise ValueError(f"dimension must be positive, got {self.dimension}")


class EmbeddingError(Exception):
    pass


@dataclass
class EmbedResult:
    dimension: int
    vectors: list  # sentence: list[vec]; token: list[list[vec]]
    tokens: list[list[str]] | None = None


class HttpEmbeddingProvider:
    """Client for the embedding wire contract."""

    def __init__(self, ref: EmbeddingProviderRef, timeout_s: float = 60.0, transport=None):
        self.ref = ref
        self.granularity = ref.granularity
        self.timeout_s = timeout_s
        self._transport = transport or self._http_post

    def _http_post(self, url: str, payload: dict) -> dict:
        import os

        import requests

        headers = {"Content-Type": "application/json"}
        if self.ref.auth_env:
            token = os.environ.get(self.ref.auth_env, "")
            if token:
                headers["X-Auth-Token"] = token
        try:
            response = requests.post(url, json=payload, headers=headers, timeout=self.timeout_s)
        except requests.RequestException as exc:
            raise EmbeddingError(f"embedding transport failure: {exc}") from exc
        if response.status_code != 200:
            raise EmbeddingError(f"embedding HTTP {response.status_code}: {response.text[:200]}")
        return response.json()

    def embed(self, texts: list[str], granularity: Granularity | None = None) -> EmbedResult:
        granularity = granularity or self.granularity
        url = self.ref.base_url.rstrip("/") + "/embed"
        reply = self._transport(url, {"texts": texts, "granularity": granularity.value})
        if "vectors" not in reply or "dimension" not in reply:
            raise EmbeddingError(f"malformed embedding reply: {list(reply)}")
        return EmbedResult(
            dimension=int(reply["dimension"]),
            vectors=reply["vectors"],
            tokens=reply.get("tokens"),
        )


def _stable_bucket(token: str, buckets: int) -> int:
    digest = hashlib.sha1(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big") % buckets


class HashSentenceProvider:
    """Deterministic bag-of-hashed-tokens sentence vectors; offline stand-in."""

    granularity = Granularity.SENTENCE

    def __init__(self, dimension: int = 64):
        self.dimension = dimension

    def embed(self, texts: list[str], granularity: Granularity | None = None) -> EmbedResult:
        if granularity not in (None, Granularity.SENTENCE):
            raise EmbeddingError("HashSentenceProvider only embeds sentences")
        vectors = []
        for text in texts:
            vec = [0.0] * self.dimension
            for token in ws_punct_tokens(text):
                vec[_stable_bucket(token, self.dimension)] += 1.0
            vectors.append(vec)
        return EmbedResult(dimension=self.dimension, vectors=vectors)


class MappedSentenceProvider:
    """Sentence vectors from an explicit text -> vector table (test fixture)."""

    granularity = Granularity.SENTENCE

    def __init__(self, table: dict[str, list[float]]):
        self.table = dict(table)
        self.dimension = len(next(iter(table.values()))) if table else 0

    def embed(self, texts: list[str], granularity: Granularity | None = None) -> EmbedResult:
        try:
            vectors = [list(self.table[text]) for text in texts]
        except KeyError as exc:
            raise EmbeddingError(f"no stub vector for text {exc}") from None
        return EmbedResult(dimension=self.dimension, vectors=vectors)


class OneHotTokenProvider:
    """One-hot token vectors over the call's own vocabulary.

    Under this stub, greedy-matching precision reduces to the fraction of
    candidate tokens present in the reference token set (and recall to its
    mirror), which makes BERTScore behavior checkable by set arithmetic.
    """

    granularity = Granularity.TOKEN

    def embed(self, texts: list[str], granularity: Granularity | None = None) -> EmbedResult:
        if granularity not in (None, Granularity.TOKEN):
            raise EmbeddingError("OneHotTokenProvider only embeds tokens")
        tokenized = [ws_punct_tokens(text) for text in texts]
        vocab = sorted({token for tokens in tokenized for token in tokens})
        position = {token: i for i, token in enumerate(vocab)}
        dimension = max(len(vocab), 1)
        vectors = []
        for tokens in tokenized:
            per_text = []
            for token in tokens:
                vec = [0.0] * dimension
                vec[position[token]] = 1.0
                per_text.append(vec)
            vectors.append(per_text)
        return EmbedResult(dimension=dimension, vectors=vectors, tokens=tokenized)


class SharedAxisTokenProvider:
    """Token vectors sqrt(1/2)*e_shared + sqrt(1/2)*e_token.

    Distinct tokens then have pairwise cosine exactly 0.5 and identical tokens
    cosine 1.0: the worked-matrix fixture for greedy matching.
    """

    granularity = Granularity.TOKEN

    def embed(self, texts: list[str], granularity: Granularity | None = None) -> EmbedResult:
        tokenized = [ws_punct_tokens(text) for text in texts]
        vocab = sorted({token for tokens in tokenized for token in tokens})
        position = {token: i + 1 for i, token in enumerate(vocab)}
        dimension = len(vocab) + 1
        component = math.sqrt(0.5)
        vectors = []
        for tokens in tokenized:
            per_text = []
            for token in tokens:
                vec = [0.0] * dimension
                vec[0] = component
                vec[position[token]] = component
                per_text.append(vec)
            vectors.append(per_text)
        return EmbedResult(dimension=dimension, vectors=vectors, tokens=tokenized)


def cosine(u: list[float], v: list[float]) -> float:
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)
