"""Text encoders behind the embedding service.

Two families share one interface:

  - ``DeterministicEncoder``: hash-projection vectors, no model weights, fully
    offline. The default, and the one the test suite runs against.
  - Transformer-backed encoders (sentence-transformers for sentence vectors,
    a Hugging Face encoder's last hidden layer for token vectors). These are
    the reference production configuration and activate when model ids are
    configured and the neural extra is installed.

Both are deterministic for identical inputs within a service lifetime, and
both report the dimension their vectors actually have.
"""

from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass

import numpy as np

DEFAULT_DIMENSION = 256
DEFAULT_MAX_TEXT_LENGTH = 20000

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def simple_tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class EncoderConfig:
    sentence_model: str = "hash-v1"
    token_model: str = "hash-v1"
    dimension: int = DEFAULT_DIMENSION
    max_batch: int = 64
    max_text_length: int = DEFAULT_MAX_TEXT_LENGTH
    device: str = "cpu"

    @classmethod
    def from_env(cls) -> "EncoderConfig":
        return cls(
            sentence_model=os.environ.get("EMBED_SENTENCE_MODEL", "hash-v1"),
            token_model=os.environ.get("EMBED_TOKEN_MODEL", "hash-v1"),
            dimension=int(os.environ.get("EMBED_DIMENSION", DEFAULT_DIMENSION)),
            max_batch=int(os.environ.get("EMBED_MAX_BATCH", 64)),
            max_text_length=int(os.environ.get("EMBED_MAX_TEXT_LENGTH", DEFAULT_MAX_TEXT_LENGTH)),
            device=os.environ.get("EMBED_DEVICE", "cpu"),
        )


class DeterministicEncoder:
    """Hash-projection encoder: stable unit vector per token, bag sum per text."""

    def __init__(self, dimension: int = DEFAULT_DIMENSION):
        self.dimension = dimension
        self._token_cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        cached = self._token_cache.get(token)
        if cached is not None:
            return cached
        # expand sha256(token || counter) into enough bytes for the dimension
        chunks = []
        needed = self.dimension * 4
        counter = 0
        while needed > 0:
            digest = hashlib.sha256(f"{token}\x00{counter}".encode("utf-8")).digest()
            chunks.append(digest)
            needed -= len(digest)
            counter += 1
        raw = b"".join(chunks)[: self.dimension * 4]
        ints = np.frombuffer(raw, dtype=np.uint32).astype(np.float64)
        vector = ints / np.float64(2**32) - 0.5
        vector /= np.linalg.norm(vector)
        self._token_cache[token] = vector
        return vector

    def encode_sentences(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dimension))
        for i, text in enumerate(texts):
            tokens = simple_tokens(text)
            if not tokens:
                continue
            total = np.sum([self._token_vector(t) for t in tokens], axis=0)
            norm = np.linalg.norm(total)
            out[i] = total / norm if norm > 0 else total
        return out

    def encode_tokens(self, texts: list[str]) -> tuple[list[list[str]], list[np.ndarray]]:
        tokenized = [simple_tokens(text) for text in texts]
        vectors = [
            np.stack([self._token_vector(t) for t in tokens])
            if tokens
            else np.zeros((0, self.dimension))
            for tokens in tokenized
        ]
        return tokenized, vectors


class SentenceTransformerEncoder:
    """Sentence vectors from a sentence-transformers model."""

    def __init__(self, model_id: str, device: str = "cpu", max_batch: int = 64):
        from sentence_transformers import SentenceTransformer

        self._model = SentenceTransformer(model_id, device=device)
        self._max_batch = max_batch
        self.dimension = int(self._model.get_sentence_embedding_dimension())

    def encode_sentences(self, texts: list[str]) -> np.ndarray:
        return np.asarray(
            self._model.encode(texts, batch_size=self._max_batch, show_progress_bar=False)
        )


class HFTokenEncoder:
    """Token vectors from the last hidden layer of a Hugging Face encoder."""

    def __init__(self, model_id: str, device: str = "cpu", max_batch: int = 64):
        import torch
        from transformers import AutoModel, AutoTokenizer

        self._torch = torch
        self._tokenizer = AutoTokenizer.from_pretrained(model_id)
        self._model = AutoModel.from_pretrained(model_id).to(device).eval()
        self._device = device
        self._max_batch = max_batch
        self.dimension = int(self._model.config.hidden_size)

    def encode_tokens(self, texts: list[str]) -> tuple[list[list[str]], list[np.ndarray]]:
        all_tokens: list[list[str]] = []
        all_vectors: list[np.ndarray] = []
        for start in range(0, len(texts), self._max_batch):
            batch = texts[start:start + self._max_batch]
            encoded = self._tokenizer(
                batch, return_tensors="pt", padding=True, truncation=True
            ).to(self._device)
            with self._torch.no_grad():
                hidden = self._model(**encoded).last_hidden_state
            for row in range(len(batch)):
                mask = encoded["attention_mask"][row].bool()
                vectors = hidden[row][mask].cpu().numpy()
                ids = encoded["input_ids"][row][mask]
                tokens = self._tokenizer.convert_ids_to_tokens(ids)
                all_tokens.append(list(tokens))
                all_vectors.append(vectors)
        return all_tokens, all_vectors


def build_encoders(config: EncoderConfig):
    """Instantiate the (sentence, token) encoder pair for a config.

    Both encoders must agree with the declared dimension; the /info contract
    promises a single dimension for the whole service.
    """
    if config.sentence_model == "hash-v1" and config.token_model == "hash-v1":
        shared = DeterministicEncoder(config.dimension)
        return shared, shared

    if config.sentence_model == "hash-v1":
        sentence = DeterministicEncoder(config.dimension)
    else:
        sentence = SentenceTransformerEncoder(
            config.sentence_model, config.device, config.max_batch
        )
    if config.token_model == "hash-v1":
        token = DeterministicEncoder(config.dimension)
    else:
        token = HFTokenEncoder(config.token_model, config.device, config.max_batch)

    for encoder, name in ((sentence, config.sentence_model), (token, config.token_model)):
        if encoder.dimension != config.dimension:
            raise ValueError(
                f"declared dimension {config.dimension} does not match "
                f"encoder '{name}' dimension {encoder.dimension}"
            )
    return sentence, token
