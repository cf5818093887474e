"""Instruction-tuple construction for expert-model tuning.

Each training record becomes a three-element tuple: an instruction prompt
rendered from the record's tags, the question as input, and the accepted
answer as response. Tuples serialize to line-delimited JSON, the common
interchange format for instruction-tuning toolchains.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .dataset import OVER_LENGTH, QARecord

DEFAULT_INSTRUCTION_TEMPLATE = "Please answer the following questions concerning {tags}."
FALLBACK_INSTRUCTION = "Please answer the following question."
DEFAULT_PREAMBLE = (
    "Below is an instruction that describes a task. "
    "Write a response that appropriately completes the request"
)


@dataclass(frozen=True)
class InstructionTuple:
    instruction: str
    input: str
    response: str
    source_id: str

    def __post_init__(self) -> None:
        if not (self.instruction and self.input and self.response):
            raise ValueError(f"tuple from {self.source_id}: all three texts must be non-empty")

    def to_json_dict(self) -> dict:
        return {
            "instruction": self.instruction,
            "input": self.input,
            "response": self.response,
            "source_id": self.source_id,
        }


@dataclass
class BuildReport:
    total: int = 0
    fallback_count: int = 0
    skipped_over_length: int = 0


def build_tuples(
    train: list[QARecord],
    template: str = DEFAULT_INSTRUCTION_TEMPLATE,
    *,
    skip_over_length: bool = False,
) -> tuple[list[InstructionTuple], BuildReport]:
    """Build one instruction tuple per training record.

    ``template`` must contain a ``{tags}`` placeholder; multi-tag records are
    joined with ", ". Records without tags fall back to a generic instruction
    and are counted in the report.
    """
    if "{tags}" not in template:
        raise ValueError("instruction template must contain a {tags} placeholder")

    report = BuildReport()
    tuples: list[InstructionTuple] = []
    for record in train:
        if skip_over_length and OVER_LENGTH in record.flags:
            report.skipped_over_length += 1
            continue
        if record.tags:
            instruction = template.format(tags=", ".join(record.tags))
        else:
            instruction = FALLBACK_INSTRUCTION
            report.fallback_count += 1
        tuples.append(
            InstructionTuple(
                instruction=instruction,
                input=record.question,
                response=record.answer,
                source_id=record.id,
            )
        )
    report.total = len(tuples)
    return tuples, report


def render_prompt(t: InstructionTuple, preamble: str = DEFAULT_PREAMBLE) -> str:
    """Render a tuple as one prompt text: preamble, then labeled sections in order."""
    sections = f"Instruction: {t.instruction}\nInput: {t.input}\nResponse: {t.response}"
    if not preamble:
        return sections
    return f"{preamble}\n{sections}"


def parse_prompt(text: str, source_id: str = "parsed") -> InstructionTuple:
    """Inverse of render_prompt for well-formed prompts (used to round-trip check)."""
    marker = "Instruction: "
    start = text.find(marker)
    if start < 0:
        raise ValueError("prompt has no Instruction section")
    body = text[start + len(marker):]
    instruction, _, rest = body.partition("\nInput: ")
    input_text, _, response = rest.partition("\nResponse: ")
    if not rest or not response:
        raise ValueError("prompt is missing Input or Response section")
    return InstructionTuple(
        instruction=instruction,
        input=input_text,
        response=response,
        source_id=source_id,
    )


def save_tuples(tuples: list[InstructionTuple], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in tuples:
            f.write(json.dumps(t.to_json_dict(), ensure_ascii=False, sort_keys=True))
            f.write("\n")


def load_tuples(path: str | Path) -> list[InstructionTuple]:
    tuples = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                data = json.loads(line)
                tuples.append(
                    InstructionTuple(
                        instruction=data["instruction"],
                        input=data["input"],
                        response=data["response"],
                        source_id=data.get("source_id", "unknown"),
                    )
                )
    return tuples
