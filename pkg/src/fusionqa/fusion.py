"""Prompt composition for the five experimental arms and run orchestration.

Arms: expert model alone, plain LLM, LLM + retrieved chunks, LLM + expert
opinion, LLM + both. Composition places retrieved chunks (in rank order)
before the expert opinion, both before the question. Under budget pressure,
chunks are truncated lowest-rank-first, then dropped, then the expert opinion;
the question is never truncated.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .backends import (
    BackendError,
    ChatClient,
    GenBackend,
    ResponseCache,
    Role,
    cached_complete,
)
from .bm25 import Bm25Index, Chunk, search
from .dataset import QARecord
from .tokenizers import WS_PUNCT, Tokenizer

log = logging.getLogger(__name__)

CHUNKS_LABEL = "Reference chunks"
EXPERT_LABEL = "Expert opinion"

_TEMPLATE_DIR = Path(__file__).parent / "templates"


class StrategyKind(Enum):
    EXPERT_ONLY = "EXPERT_ONLY"
    LLM_ONLY = "LLM_ONLY"
    LLM_BM25 = "LLM_BM25"
    LLM_EXPERT = "LLM_EXPERT"
    LLM_BM25_EXPERT = "LLM_BM25_EXPERT"

    @property
    def uses_bm25(self) -> bool:
        return self in (StrategyKind.LLM_BM25, StrategyKind.LLM_BM25_EXPERT)

    @property
    def uses_expert(self) -> bool:
        return self in (
            StrategyKind.EXPERT_ONLY,
            StrategyKind.LLM_EXPERT,
            StrategyKind.LLM_BM25_EXPERT,
        )

    @property
    def column_label(self) -> str:
        return {
            StrategyKind.EXPERT_ONLY: "Expert",
            StrategyKind.LLM_ONLY: "LLM",
            StrategyKind.LLM_BM25: "+BM25",
            StrategyKind.LLM_EXPERT: "+Expert",
            StrategyKind.LLM_BM25_EXPERT: "+BM25 & Expert",
        }[self]


STRATEGY_ORDER = (
    StrategyKind.EXPERT_ONLY,
    StrategyKind.LLM_ONLY,
    StrategyKind.LLM_BM25,
    StrategyKind.LLM_EXPERT,
    StrategyKind.LLM_BM25_EXPERT,
)


class PromptBudgetError(Exception):
    """The question alone does not fit the token budget."""


@dataclass(frozen=True)
class PromptTemplates:
    preamble: str
    chunks_label: str = CHUNKS_LABEL
    expert_label: str = EXPERT_LABEL
    question_label: str = "Question"


def load_templates(template_dir: str | Path | None = None) -> PromptTemplates:
    directory = Path(template_dir) if template_dir else _TEMPLATE_DIR
    preamble = (directory / "fusion_preamble.txt").read_text(encoding="utf-8").strip()
    return PromptTemplates(preamble=preamble)


@dataclass(frozen=True)
class FusionRequest:
    """One question plus everything needed to compose its prompt."""

    question: str
    strategy: StrategyKind
    retrieved: tuple[Chunk, ...] = ()
    expert_opinion: str | None = None
    budget_tokens: int = 3000

    def __post_init__(self) -> None:
        if self.retrieved and not self.strategy.uses_bm25:
            raise ValueError(f"{self.strategy.value}: retrieved chunks are not allowed")
        if self.strategy.uses_expert != (self.expert_opinion is not None):
            raise ValueError(
                f"{self.strategy.value}: expert_opinion must be "
                f"{'present' if self.strategy.uses_expert else 'absent'}"
            )
        if self.budget_tokens <= 0:
            raise ValueError("budget_tokens must be positive")


@dataclass(frozen=True)
class GenerationRecord:
    question_id: str
    strategy: StrategyKind
    prompt: str
    response: str
    latency_ms: int
    backend_fingerprint: str
    failed: bool = False
    error: str | None = None

    def __post_init__(self) -> None:
        if not self.response and not self.failed:
            raise ValueError(f"{self.question_id}: empty response on a non-failed record")

    def to_json_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "strategy": self.strategy.value,
            "prompt": self.prompt,
            "response": self.response,
            "latency_ms": self.latency_ms,
            "backend_fingerprint": self.backend_fingerprint,
            "failed": self.failed,
            "error": self.error,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "GenerationRecord":
        return cls(
            question_id=data["question_id"],
            strategy=StrategyKind(data["strategy"]),
            prompt=data["prompt"],
            response=data["response"],
            latency_ms=int(data["latency_ms"]),
            backend_fingerprint=data["backend_fingerprint"],
            failed=bool(data.get("failed", False)),
            error=data.get("error"),
        )


def _render(
    templates: PromptTemplates,
    question: str,
    chunk_bodies: list[str],
    expert_text: str | None,
) -> str:
    parts = [templates.preamble, ""]
    if chunk_bodies:
        parts.append(f"{templates.chunks_label}:")
        for rank, body in enumerate(chunk_bodies, 1):
            parts.append(f"[{rank}] {body}")
        parts.append("")
    if expert_text is not None:
        parts.append(f"{templates.expert_label}:")
        parts.append(expert_text)
        parts.append("")
    parts.append(f"{templates.question_label}:")
    parts.append(question)
    return "\n".join(parts)


def compose_prompt(
    req: FusionRequest,
    templates: PromptTemplates,
    tokenizer: Tokenizer = WS_PUNCT,
) -> str:
    """Compose the prompt for a request, enforcing the token budget.

    Pure function of (request, templates): identical inputs give identical
    prompts. Raises PromptBudgetError when the question alone cannot fit.
    """
    if req.strategy is StrategyKind.EXPERT_ONLY:
        if tokenizer.count(req.question) > req.budget_tokens:
            raise PromptBudgetError(
                f"question alone exceeds budget of {req.budget_tokens} tokens"
            )
        return req.question

    base = _render(templates, req.question, [], None)
    if tokenizer.count(base) > req.budget_tokens:
        raise PromptBudgetError(f"question alone exceeds budget of {req.budget_tokens} tokens")

    chunk_bodies = [chunk.body for chunk in req.retrieved]
    expert_text = req.expert_opinion if req.strategy.uses_expert else None

    while True:
        prompt = _render(templates, req.question, chunk_bodies, expert_text)
        overshoot = tokenizer.count(prompt) - req.budget_tokens
        if overshoot <= 0:
            return prompt
        if chunk_bodies:
            victim = chunk_bodies[-1].split()
            if len(victim) <= overshoot:
                chunk_bodies.pop()
                log.debug("budget: dropped lowest-ranked chunk")
            else:
                chunk_bodies[-1] = " ".join(victim[:-max(overshoot, 1)])
        elif expert_text is not None:
            victim = expert_text.split()
            if len(victim) <= overshoot:
                expert_text = None
                log.debug("budget: dropped expert opinion")
            else:
                expert_text = " ".join(victim[:-max(overshoot, 1)])
        else:  # pragma: no cover - base prompt was already checked
            raise PromptBudgetError("cannot fit prompt in budget")


def consult_expert(
    backend: GenBackend,
    question: str,
    *,
    client: ChatClient,
    cache: ResponseCache | None = None,
    question_id: str = "",
    strategy: StrategyKind = StrategyKind.EXPERT_ONLY,
) -> tuple[str, int]:
    """Gather the expert model's opinion for a question; returns (opinion, latency_ms)."""
    if backend.role is not Role.EXPERT:
        raise ValueError(f"consult_expert needs an EXPERT-role backend, got {backend.role}")
    return cached_complete(
        client,
        backend,
        [{"role": "user", "content": question}],
        cache,
        question_id=question_id,
        strategy=strategy.value,
        prompt_key=question,
    )


class FailureCeilingExceeded(Exception):
    def __init__(self, strategy: StrategyKind, failed: int, total: int, records: list):
        super().__init__(
            f"{strategy.value}: {failed}/{total} questions failed, over the configured ceiling"
        )
        self.records = records


def run_strategy(
    questions: list[QARecord],
    strategy: StrategyKind,
    backends: dict[str, GenBackend],
    index: Bm25Index | None = None,
    cache: ResponseCache | None = None,
    *,
    client: ChatClient,
    chunks: dict[str, Chunk] | None = None,
    templates: PromptTemplates | None = None,
    retrieval_k: int = 3,
    budget_tokens: int = 3000,
    workers: int = 4,
    failure_ceiling: float = 0.25,
    tokenizer: Tokenizer = WS_PUNCT,
) -> list[GenerationRecord]:
    """Run one experimental arm over the given questions.

    One record per question, in question order. Per-question failures are
    recorded and the run continues; the run as a whole fails only when the
    failure rate exceeds ``failure_ceiling``.
    """
    if strategy.uses_bm25 and (index is None or chunks is None):
        raise ValueError(f"{strategy.value} requires a BM25 index and its chunk store")
    templates = templates or load_templates()

    def one(question: QARecord) -> GenerationRecord:
        try:
            return _run_one(question)
        except (BackendError, PromptBudgetError) as exc:
            backend = backends["expert" if strategy is StrategyKind.EXPERT_ONLY else "llm"]
            log.warning("%s on %s failed: %s", strategy.value, question.id, exc)
            return GenerationRecord(
                question_id=question.id,
                strategy=strategy,
                prompt="",
                response="",
                latency_ms=0,
                backend_fingerprint=backend.fingerprint,
                failed=True,
                error=str(exc),
            )

    def _run_one(question: QARecord) -> GenerationRecord:
        retrieved: tuple[Chunk, ...] = ()
        if strategy.uses_bm25:
            hits = search(index, question.question, retrieval_k)
            retrieved = tuple(chunks[chunk_id] for chunk_id, _ in hits)

        if strategy is StrategyKind.EXPERT_ONLY:
            backend = backends["expert"]
            if tokenizer.count(question.question) > budget_tokens:
                raise PromptBudgetError(
                    f"question alone exceeds budget of {budget_tokens} tokens"
                )
            opinion, latency = consult_expert(
                backend,
                question.question,
                client=client,
                cache=cache,
                question_id=question.id,
                strategy=strategy,
            )
            req = FusionRequest(
                question=question.question,
                strategy=strategy,
                expert_opinion=opinion,
                budget_tokens=budget_tokens,
            )
            prompt = compose_prompt(req, templates, tokenizer)
            return GenerationRecord(
                question_id=question.id,
                strategy=strategy,
                prompt=prompt,
                response=opinion,
                latency_ms=latency,
                backend_fingerprint=backend.fingerprint,
            )

        opinion: str | None = None
        if strategy.uses_expert:
            opinion, _ = consult_expert(
                backends["expert"],
                question.question,
                client=client,
                cache=cache,
                question_id=question.id,
                strategy=strategy,
            )

        req = FusionRequest(
            question=question.question,
            strategy=strategy,
            retrieved=retrieved,
            expert_opinion=opinion,
            budget_tokens=budget_tokens,
        )
        prompt = compose_prompt(req, templates, tokenizer)
        backend = backends["llm"]
        response, latency = cached_complete(
            client,
            backend,
            [{"role": "user", "content": prompt}],
            cache,
            question_id=question.id,
            strategy=strategy.value,
            prompt_key=prompt,
        )
        return GenerationRecord(
            question_id=question.id,
            strategy=strategy,
            prompt=prompt,
            response=response,
            latency_ms=latency,
            backend_fingerprint=backend.fingerprint,
        )

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        records = list(pool.map(one, questions))

    failed = sum(1 for record in records if record.failed)
    if questions and failed / len(questions) > failure_ceiling:
        raise FailureCeilingExceeded(strategy, failed, len(questions), records)
    return records


def save_records(records: list[GenerationRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record.to_json_dict(), ensure_ascii=False, sort_keys=True))
            f.write("\n")


def load_records(path: str | Path) -> list[GenerationRecord]:
    records = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(GenerationRecord.from_json_dict(json.loads(line)))
    return records
