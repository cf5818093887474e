"""Pluggable tokenizers shared by corpus stats, length labeling, BM25 and metrics.

Token counts are only comparable within one tokenizer, so every artifact that
records a count also records the tokenizer id that produced it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

_ALNUM_RE = re.compile(r"[a-z0-9]+")


def ws_punct_tokens(text: str) -> list[str]:
    """Lowercase, then split at whitespace and punctuation; tokens are alnum runs."""
    return _ALNUM_RE.findall(text.lower())


@dataclass(frozen=True)
class Tokenizer:
    id: str
    split: Callable[[str], list[str]]

    def __call__(self, text: str) -> list[str]:
        return self.split(text)

    def count(self, text: str) -> int:
        return len(self.split(text))


WS_PUNCT = Tokenizer("ws_punct", ws_punct_tokens)

_REGISTRY: dict[str, Tokenizer] = {WS_PUNCT.id: WS_PUNCT}


def register_tokenizer(tokenizer: Tokenizer) -> None:
    _REGISTRY[tokenizer.id] = tokenizer


def get_tokenizer(tokenizer_id: str) -> Tokenizer:
    try:
        return _REGISTRY[tokenizer_id]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise KeyError(f"unknown tokenizer '{tokenizer_id}' (known: {known})") from None
