"""Deterministic offline backends for --dry-run mode.

The mock transport speaks the same wire contract as a real backend but never
touches the network. Responses come from an optional canned table keyed by a
fingerprint of the question text, with deterministic fallbacks for unknown
questions, so dry runs work on any corpus.

Mock behavior:
  - expert endpoint: canned opinion, or a deterministic synthetic one
  - llm endpoint: canned response per (question, arm), arm inferred from the
    section labels present in the prompt
  - judge endpoint: rephrase requests echo the answer with a marker suffix;
    pairwise requests prefer the longer response (ties go to B); no-answer
    probes apply the clarification patterns
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .backends import BackendError, GenBackend, Role
from .fusion import CHUNKS_LABEL, EXPERT_LABEL
from .metrics import DEFAULT_NO_ANSWER_PATTERNS

_DATA_DIR = Path(__file__).parent / "data"

REPHRASE_SUFFIX = " (restated)"


def question_fingerprint(question: str) -> str:
    normalized = " ".join(question.split())
    return hashlib.sha1(normalized.encode("utf-8")).hexdigest()[:12]


def dryrun_backends() -> dict[str, GenBackend]:
    return {
        "llm": GenBackend(base_url="mock://llm", model="mock-llm", role=Role.LLM),
        "expert": GenBackend(base_url="mock://expert", model="mock-expert-7b", role=Role.EXPERT),
        "judge": GenBackend(base_url="mock://judge", model="mock-judge", role=Role.LLM),
    }


def load_canned_responses(path: str | Path | None = None) -> dict:
    path = Path(path) if path else _DATA_DIR / "mock_responses.json"
    if not path.exists():
        return {}
    with open(path, encoding="utf-8") as f:
        return json.load(f)


class DryRunTransport:
    """In-process stand-in for the chat wire protocol. Zero network use."""

    def __init__(self, canned: dict | None = None):
        canned = canned if canned is not None else load_canned_responses()
        self.responses: dict = canned.get("responses", {})
        self.opinions: dict = canned.get("opinions", {})

    def __call__(self, url: str, payload: dict, headers: dict, timeout: float) -> dict:
        prompt = payload["messages"][-1]["content"]
        if url.startswith("mock://expert"):
            return {"content": self._expert(prompt)}
        if url.startswith("mock://judge"):
            return {"content": self._judge(prompt)}
        if url.startswith("mock://llm"):
            return {"content": self._llm(prompt)}
        raise BackendError(f"mock transport got non-mock url {url}")

    def _expert(self, question: str) -> str:
        fingerprint = question_fingerprint(question)
        canned = self.opinions.get(fingerprint)
        if canned:
            return canned
        head = " ".join(question.split()[:10])
        return (
            f"Expert opinion: regarding '{head}', check the service documentation "
            "for the configured limits and pricing before changing anything."
        )

    @staticmethod
    def _infer_arm(prompt: str) -> str:
        has_chunks = f"{CHUNKS_LABEL}:" in prompt
        has_expert = f"{EXPERT_LABEL}:" in prompt
        if has_chunks and has_expert:
            return "LLM_BM25_EXPERT"
        if has_chunks:
            return "LLM_BM25"
        if has_expert:
            return "LLM_EXPERT"
        return "LLM_ONLY"

    @staticmethod
    def _extract_question(prompt: str) -> str:
        marker = "Question:\n"
        position = prompt.rfind(marker)
        return prompt[position + len(marker):] if position >= 0 else prompt

    def _llm(self, prompt: str) -> str:
        question = self._extract_question(prompt)
        arm = self._infer_arm(prompt)
        fingerprint = question_fingerprint(question)
        canned = self.responses.get(fingerprint, {}).get(arm)
        if canned:
            return canned
        head = " ".join(question.split()[:10])
        return f"Mock {arm} answer about '{head}'."

    def _judge(self, prompt: str) -> str:
        if prompt.startswith("Rephrase the following answer"):
            marker = "Answer:\n"
            answer = prompt[prompt.index(marker) + len(marker):]
            return answer.strip() + REPHRASE_SUFFIX
        if "Response A:" in prompt and "Response B:" in prompt:
            response_a = _between(prompt, "Response A:\n", "\n\nResponse B:")
            response_b = _between(prompt, "Response B:\n", "\n\nWhich response")
            return "A" if len(response_a) > len(response_b) else "B"
        if "Reply with exactly one word: YES" in prompt:
            marker = "Response:\n"
            response = prompt[prompt.index(marker) + len(marker):]
            hit = any(p.search(response) for p in DEFAULT_NO_ANSWER_PATTERNS)
            return "YES" if hit else "NO"
        raise BackendError("mock judge got an unrecognized prompt shape")


def _between(text: str, start: str, end: str) -> str:
    i = text.index(start) + len(start)
    j = text.index(end, i)
    return text[i:j]
