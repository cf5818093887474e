"""Markdown chunking and a from-scratch BM25 inverted index with top-k search.

Scoring follows the classic formulation with the +1-inside-log IDF variant,
which keeps every term contribution non-negative:

    score(q, d) = sum over query terms of
        IDF(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len(d) / avg_len))
    IDF(t) = ln((N - df + 0.5) / (df + 0.5) + 1)

Terms are lowercased, punctuation-stripped, whitespace-tokenized.
"""

from __future__ import annotations

import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .cleaning import split_fenced
from .tokenizers import ws_punct_tokens

log = logging.getLogger(__name__)

INDEX_FORMAT_VERSION = 1

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75
DEFAULT_TARGET_TOKENS = 512
DEFAULT_OVERLAP_TOKENS = 64
DEFAULT_TOP_K = 3


def bm25_tokens(text: str) -> list[str]:
    return ws_punct_tokens(text)


@dataclass(frozen=True)
class Chunk:
    """A bounded fragment of one documentation file."""

    chunk_id: str
    doc_path: str
    heading_trail: tuple[str, ...]
    body: str
    token_count: int

    def __post_init__(self) -> None:
        if self.token_count <= 0:
            raise ValueError(f"chunk {self.chunk_id}: token_count must be positive")

    def to_json_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "doc_path": self.doc_path,
            "heading_trail": list(self.heading_trail),
            "body": self.body,
            "token_count": self.token_count,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Chunk":
        return cls(
            chunk_id=data["chunk_id"],
            doc_path=data["doc_path"],
            heading_trail=tuple(data["heading_trail"]),
            body=data["body"],
            token_count=int(data["token_count"]),
        )


_HEADING_RE = re.compile(r"^(#{1,6})\s+(.*?)\s*#*\s*$")


def _split_sections(markdown: str) -> list[tuple[tuple[str, ...], str]]:
    """Split a markdown document at heading boundaries, tracking the heading path."""
    sections: list[tuple[tuple[str, ...], list[str]]] = []
    trail: list[tuple[int, str]] = []
    current: list[str] = []

    def flush() -> None:
        if current and any(line.strip() for line in current):
            sections.append((tuple(title for _, title in trail), list(current)))
        current.clear()

    segments, _ = split_fenced(markdown)
    for is_code, segment in segments:
        if is_code:
            current.append(segment)
            continue
        for line in segment.splitlines(keepends=True):
            m = _HEADING_RE.match(line.rstrip("\n"))
            if m:
                flush()
                level, title = len(m.group(1)), m.group(2)
                while trail and trail[-1][0] >= level:
                    trail.pop()
                trail.append((level, title))
            else:
                current.append(line)
    flush()
    return [(trail_titles, "".join(lines)) for trail_titles, lines in sections]


def _section_items(section_text: str) -> list[tuple[str, int]]:
    """Break section content into window items: single tokens and atomic code blocks."""
    items: list[tuple[str, int]] = []
    segments, _ = split_fenced(section_text)
    for is_code, segment in segments:
        if is_code:
            weight = max(len(bm25_tokens(segment)), 1)
            items.append((segment.strip("\n"), weight))
        else:
            for word in segment.split():
                items.append((word, 1))
    return items


def chunk_docs(
    docs: list[tuple[str, str]],
    target_tokens: int = DEFAULT_TARGET_TOKENS,
    overlap_tokens: int = DEFAULT_OVERLAP_TOKENS,
) -> list[Chunk]:
    """Chunk markdown documents into overlapping windows of at most ``target_tokens``.

    Documents split at heading boundaries first; each section is then windowed
    with stride ``target_tokens - overlap_tokens``. Code fences are atomic: a
    fence larger than the target is emitted whole with a warning.
    """
    if not target_tokens > overlap_tokens >= 0:
        raise ValueError(
            f"need target_tokens > overlap_tokens >= 0, got {target_tokens}/{overlap_tokens}"
        )

    chunks: list[Chunk] = []
    stride = target_tokens - overlap_tokens
    for doc_path, markdown in docs:
        seq = 0
        for trail, section_text in _split_sections(markdown):
            items = _section_items(section_text)
            if not items:
                continue
            start = 0
            while True:
                weight = 0
                end = start
                while end < len(items) and weight + items[end][1] <= target_tokens:
                    weight += items[end][1]
                    end += 1
                if end == start:
                    # single atomic block larger than the target: emit whole
                    log.warning(
                        "%s: block of %d tokens exceeds target %d; emitting whole",
                        doc_path,
                        items[start][1],
                        target_tokens,
                    )
                    weight = items[start][1]
                    end = start + 1
                body = " ".join(item[0] for item in items[start:end])
                chunks.append(
                    Chunk(
                        chunk_id=f"{doc_path}:{seq:04d}",
                        doc_path=doc_path,
                        heading_trail=trail,
                        body=body,
                        token_count=weight,
                    )
                )
                seq += 1
                if end >= len(items):
                    break
                # advance by stride worth of item weight, but never past the
                # window end: an atomic block that missed this window must
                # start the next one, not be skipped
                advanced = 0
                new_start = start
                while new_start < len(items) and advanced < stride:
                    advanced += items[new_start][1]
                    new_start += 1
                start = max(min(new_start, end), start + 1)
                if start >= len(items):
                    break
    return chunks


@dataclass
class Bm25Index:
    postings: dict[str, list[tuple[str, int]]] = field(default_factory=dict)
    doc_lengths: dict[str, int] = field(default_factory=dict)
    avg_doc_length: float = 0.0
    doc_count: int = 0
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        return math.log((self.doc_count - df + 0.5) / (df + 0.5) + 1.0)


def build_index(chunks: list[Chunk], k1: float = DEFAULT_K1, b: float = DEFAULT_B) -> Bm25Index:
    """Build an inverted index over chunk bodies."""
    if not chunks:
        raise ValueError("cannot build a BM25 index from an empty chunk list")
    if not k1 > 0:
        raise ValueError(f"k1 must be positive, got {k1}")
    if not 0 <= b <= 1:
        raise ValueError(f"b must be in [0, 1], got {b}")
    seen = set()
    for chunk in chunks:
        if chunk.chunk_id in seen:
            raise ValueError(f"duplicate chunk_id {chunk.chunk_id}")
        seen.add(chunk.chunk_id)

    index = Bm25Index(k1=k1, b=b)
    for chunk in sorted(chunks, key=lambda c: c.chunk_id):
        tokens = bm25_tokens(chunk.body)
        index.doc_lengths[chunk.chunk_id] = len(tokens)
        for term, tf in sorted(Counter(tokens).items()):
            index.postings.setdefault(term, []).append((chunk.chunk_id, tf))
    index.doc_count = len(index.doc_lengths)
    index.avg_doc_length = sum(index.doc_lengths.values()) / index.doc_count
    return index


def search(index: Bm25Index, query: str, k: int = DEFAULT_TOP_K) -> list[tuple[str, float]]:
    """Top-k chunks by BM25 score, descending; ties break by ascending chunk_id."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    terms = bm25_tokens(query)
    if not terms:
        return []
    scores: dict[str, float] = {}
    for term in terms:
        postings = index.postings.get(term)
        if not postings:
            continue
        idf = index.idf(term)
        for chunk_id, tf in postings:
            length = index.doc_lengths[chunk_id]
            denom = tf + index.k1 * (1 - index.b + index.b * length / index.avg_doc_length)
            scores[chunk_id] = scores.get(chunk_id, 0.0) + idf * tf * (index.k1 + 1) / denom
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def save_index(index: Bm25Index, chunks: list[Chunk], path: str | Path) -> None:
    """Serialize index plus chunk store as one versioned JSON artifact.

    Serialization is canonical (sorted keys, no timestamps) so rebuilding from
    identical chunks produces a byte-identical file.
    """
    document = {
        "format_version": INDEX_FORMAT_VERSION,
        "k1": index.k1,
        "b": index.b,
        "doc_count": index.doc_count,
        "avg_doc_length": index.avg_doc_length,
        "doc_lengths": index.doc_lengths,
        "postings": {term: [[cid, tf] for cid, tf in plist] for term, plist in index.postings.items()},
        "chunks": [chunk.to_json_dict() for chunk in sorted(chunks, key=lambda c: c.chunk_id)],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, ensure_ascii=False, sort_keys=True)
        f.write("\n")


def load_index(path: str | Path) -> tuple[Bm25Index, dict[str, Chunk]]:
    with open(path, encoding="utf-8") as f:
        document = json.load(f)
    version = document.get("format_version")
    if version != INDEX_FORMAT_VERSION:
        raise ValueError(f"unsupported index format version {version}")
    index = Bm25Index(
        postings={term: [(cid, tf) for cid, tf in plist] for term, plist in document["postings"].items()},
        doc_lengths=document["doc_lengths"],
        avg_doc_length=document["avg_doc_length"],
        doc_count=document["doc_count"],
        k1=document["k1"],
        b=document["b"],
    )
    chunks = {c["chunk_id"]: Chunk.from_json_dict(c) for c in document["chunks"]}
    return index, chunks


def load_docs_dir(root: str | Path) -> list[tuple[str, str]]:
    """Read every .md file under ``root`` (recursive), path-sorted for determinism."""
    root = Path(root)
    docs = []
    for path in sorted(root.rglob("*.md")):
        docs.append((str(path.relative_to(root)), path.read_text(encoding="utf-8")))
    return docs
