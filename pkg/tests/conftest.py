from __future__ import annotations

import sys
from datetime import datetime, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from fusionqa.backends import TransientBackendError
from fusionqa.dataset import QARecord

TESTS_DIR = Path(__file__).resolve().parent
PACKAGE_DATA = Path(__file__).resolve().parents[1] / "src" / "fusionqa" / "data"


def make_record(
    record_id: str = "r1",
    question: str = "How do I configure the service?",
    answer: str = "Open the settings page and enable it.",
    tags: tuple[str, ...] = ("Azure Storage",),
    q_votes: int = 0,
    a_votes: int = 0,
    posted: str = "2022-06-01T00:00:00+00:00",
    flags: frozenset[str] = frozenset(),
) -> QARecord:
    return QARecord(
        id=record_id,
        question=question,
        answer=answer,
        tags=tags,
        question_upvotes=q_votes,
        answer_upvotes=a_votes,
        posted_at=datetime.fromisoformat(posted).astimezone(timezone.utc),
        flags=flags,
    )


class FlakyTransport:
    """Fails transiently ``failures`` times, then replies with canned content."""

    def __init__(self, failures: int, content: str = "recovered"):
        self.failures = failures
        self.content = content
        self.calls = 0

    def __call__(self, url, payload, headers, timeout):
        self.calls += 1
        if self.calls <= self.failures:
            raise TransientBackendError(f"injected failure {self.calls}")
        return {"content": self.content}


class EchoTransport:
    """Replies with the last message content; counts calls."""

    def __init__(self):
        self.calls = 0

    def __call__(self, url, payload, headers, timeout):
        self.calls += 1
        return {"content": payload["messages"][-1]["content"]}


@pytest.fixture
def toy_corpus_path() -> Path:
    return PACKAGE_DATA / "toy_corpus.jsonl"


@pytest.fixture
def toy_docs_dir() -> Path:
    return PACKAGE_DATA / "toy_docs"
