"""QA data model, corpus statistics, and the deterministic train/test split.

Corpora are persisted as line-delimited JSON, one record per line, UTF-8,
with ISO-8601 timestamps. Splits are persisted as a single JSON document
``{"seed": ..., "train": [...], "test": [...]}``.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from .tokenizers import WS_PUNCT, Tokenizer

OVER_LENGTH = "OVER_LENGTH"
HAS_IMAGE = "HAS_IMAGE"


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp; naive values are taken as UTC."""
    dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class QARecord:
    """One question/answer pair with its forum metadata.

    Immutable after construction; all pipeline operations return new records.
    """

    id: str
    question: str
    answer: str
    tags: tuple[str, ...] = ()
    question_upvotes: int = 0
    answer_upvotes: int = 0
    posted_at: datetime = field(default_factory=lambda: datetime(1970, 1, 1, tzinfo=timezone.utc))
    flags: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("record id must be non-empty")
        if self.question_upvotes < 0 or self.answer_upvotes < 0:
            raise ValueError(f"record {self.id}: upvote counts must be non-negative")
        for tag in self.tags:
            if not tag or tag != tag.strip():
                raise ValueError(f"record {self.id}: tags must be non-empty trimmed text")

    def replace(self, **changes) -> "QARecord":
        data = {
            "id": self.id,
            "question": self.question,
            "answer": self.answer,
            "tags": self.tags,
            "question_upvotes": self.question_upvotes,
            "answer_upvotes": self.answer_upvotes,
            "posted_at": self.posted_at,
            "flags": self.flags,
        }
        data.update(changes)
        return QARecord(**data)

    def to_json_dict(self) -> dict:
        return {
            "id": self.id,
            "question": self.question,
            "answer": self.answer,
            "tags": list(self.tags),
            "question_upvotes": self.question_upvotes,
            "answer_upvotes": self.answer_upvotes,
            "posted_at": format_timestamp(self.posted_at),
            "flags": sorted(self.flags),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "QARecord":
        return cls(
            id=str(data["id"]),
            question=data["question"],
            answer=data["answer"],
            tags=tuple(data.get("tags", ())),
            question_upvotes=int(data.get("question_upvotes", 0)),
            answer_upvotes=int(data.get("answer_upvotes", 0)),
            posted_at=parse_timestamp(data.get("posted_at", "1970-01-01T00:00:00Z")),
            flags=frozenset(data.get("flags", ())),
        )


def load_corpus(path: str | Path) -> list[QARecord]:
    records = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(QARecord.from_json_dict(json.loads(line)))
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"duplicate record ids in corpus: {dupes[:5]}")
    return records


def save_corpus(records: Iterable[QARecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record.to_json_dict(), ensure_ascii=False, sort_keys=True))
            f.write("\n")


@dataclass(frozen=True)
class CorpusStats:
    """Corpus-level statistics; a "sample" is the question plus its answer."""

    record_count: int
    tag_count: int
    avg_questions_per_tag: float
    avg_tags_per_question: float
    avg_question_tokens: float
    avg_answer_tokens: float
    avg_question_upvotes: float
    avg_answer_upvotes: float
    avg_sample_upvotes: float
    date_range_days: int
    tokenizer_id: str = WS_PUNCT.id

    def to_json_dict(self) -> dict:
        return {
            "record_count": self.record_count,
            "tag_count": self.tag_count,
            "avg_questions_per_tag": self.avg_questions_per_tag,
            "avg_tags_per_question": self.avg_tags_per_question,
            "avg_question_tokens": self.avg_question_tokens,
            "avg_answer_tokens": self.avg_answer_tokens,
            "avg_question_upvotes": self.avg_question_upvotes,
            "avg_answer_upvotes": self.avg_answer_upvotes,
            "avg_sample_upvotes": self.avg_sample_upvotes,
            "date_range_days": self.date_range_days,
            "tokenizer_id": self.tokenizer_id,
        }


def compute_stats(corpus: list[QARecord], tokenizer: Tokenizer = WS_PUNCT) -> CorpusStats:
    """Compute corpus statistics; an empty corpus yields all-zero stats."""
    n = len(corpus)
    if n == 0:
        return CorpusStats(0, 0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0, tokenizer.id)

    tag_assignments = 0
    distinct_tags: set[str] = set()
    q_tokens = a_tokens = 0
    q_votes = a_votes = 0
    for record in corpus:
        tag_assignments += len(record.tags)
        distinct_tags.update(record.tags)
        q_tokens += tokenizer.count(record.question)
        a_tokens += tokenizer.count(record.answer)
        q_votes += record.question_upvotes
        a_votes += record.answer_upvotes

    stamps = [r.posted_at for r in corpus]
    date_range_days = (max(stamps) - min(stamps)).days

    avg_q_votes = q_votes / n
    avg_a_votes = a_votes / n
    return CorpusStats(
        record_count=n,
        tag_count=len(distinct_tags),
        avg_questions_per_tag=tag_assignments / len(distinct_tags) if distinct_tags else 0.0,
        avg_tags_per_question=tag_assignments / n,
        avg_question_tokens=q_tokens / n,
        avg_answer_tokens=a_tokens / n,
        avg_question_upvotes=avg_q_votes,
        avg_answer_upvotes=avg_a_votes,
        avg_sample_upvotes=avg_q_votes + avg_a_votes,
        date_range_days=date_range_days,
        tokenizer_id=tokenizer.id,
    )


@dataclass(frozen=True)
class SplitResult:
    train: tuple[str, ...]
    test: tuple[str, ...]
    seed: int

    def to_json_dict(self) -> dict:
        return {"seed": self.seed, "train": list(self.train), "test": list(self.test)}

    @classmethod
    def from_json_dict(cls, data: dict) -> "SplitResult":
        return cls(train=tuple(data["train"]), test=tuple(data["test"]), seed=int(data["seed"]))


def split(corpus: list[QARecord], ratio: float = 0.8, seed: int = 0) -> SplitResult:
    """Deterministic shuffle under ``seed``, then partition at ``ratio``.

    The train side gets ``floor(ratio * n)`` records; the remainder is test.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")
    ids = [record.id for record in corpus]
    rng = random.Random(seed)
    rng.shuffle(ids)
    n_train = math.floor(ratio * len(ids))
    return SplitResult(train=tuple(ids[:n_train]), test=tuple(ids[n_train:]), seed=seed)


def load_split(path: str | Path) -> SplitResult:
    with open(path, encoding="utf-8") as f:
        return SplitResult.from_json_dict(json.load(f))


def save_split(result: SplitResult, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(result.to_json_dict(), f, indent=2)
        f.write("\n")
