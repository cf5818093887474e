from __future__ import annotations

import pytest

from conftest import make_record
from fusionqa.instructions import (
    DEFAULT_PREAMBLE,
    FALLBACK_INSTRUCTION,
    InstructionTuple,
    build_tuples,
    load_tuples,
    parse_prompt,
    render_prompt,
    save_tuples,
)

VM_QUESTION = (
    "I have set Auto shut down time for my VM as 00:30 local time. I have updated "
    "the time on one day to 01:00 at 00:14. Though the modification took affect "
    "from next day. Is this expected?"
)
VM_ANSWER = (
    "Yes, this is the expected behavior. If you update the auto shutdown schedule "
    "for your VM within 30 minutes of the previously scheduled shutdown time, the "
    "new shutdown time takes effect the next day."
)


class TestBuildTuples:
    def test_worked_example(self):
        record = make_record(
            "vm1", question=VM_QUESTION, answer=VM_ANSWER, tags=("Azure Virtual Machines",)
        )
        tuples, report = build_tuples([record])
        assert len(tuples) == 1
        t = tuples[0]
        assert t.instruction == "Please answer the following questions concerning Azure Virtual Machines."
        assert t.input == VM_QUESTION
        assert t.response == VM_ANSWER
        assert t.source_id == "vm1"
        assert report.fallback_count == 0

    def test_multi_tag_comma_join(self):
        record = make_record("m", tags=("a", "b"))
        tuples, _ = build_tuples([record])
        assert "concerning a, b." in tuples[0].instruction

    def test_empty_train_list(self):
        tuples, report = build_tuples([])
        assert tuples == []
        assert report.total == 0

    def test_tagless_record_falls_back(self):
        tuples, report = build_tuples([make_record("n", tags=())])
        assert tuples[0].instruction == FALLBACK_INSTRUCTION
        assert report.fallback_count == 1

    def test_one_tuple_per_record(self):
        train = [make_record(str(i), tags=() if i % 2 else ("t",)) for i in range(9)]
        tuples, _ = build_tuples(train)
        assert len(tuples) == len(train)
        assert [t.source_id for t in tuples] == [record.id for record in train]

    def test_template_needs_placeholder(self):
        with pytest.raises(ValueError):
            build_tuples([make_record("x")], template="no placeholder")

    def test_skip_over_length(self):
        flagged = make_record("long", flags=frozenset({"OVER_LENGTH"}))
        tuples, report = build_tuples([flagged, make_record("ok")], skip_over_length=True)
        assert [t.source_id for t in tuples] == ["ok"]
        assert report.skipped_over_length == 1

    def test_rejects_empty_fields(self):
        with pytest.raises(ValueError):
            InstructionTuple(instruction="i", input="", response="r", source_id="s")


class TestRenderPrompt:
    def test_worked_block(self):
        t = InstructionTuple(
            instruction="Please answer the following questions concerning Azure Virtual Machines.",
            input=VM_QUESTION,
            response=VM_ANSWER,
            source_id="vm1",
        )
        rendered = render_prompt(t)
        expected = (
            f"{DEFAULT_PREAMBLE}\n"
            f"Instruction: {t.instruction}\n"
            f"Input: {VM_QUESTION}\n"
            f"Response: {VM_ANSWER}"
        )
        assert rendered == expected
        assert rendered.startswith("Below is an instruction that describes a task.")
        assert rendered.index("Instruction:") < rendered.index("Input:") < rendered.index("Response:")

    def test_empty_preamble_gives_sections_only(self):
        t = InstructionTuple("i text", "q text", "a text", "s")
        assert render_prompt(t, preamble="") == "Instruction: i text\nInput: q text\nResponse: a text"

    def test_parse_round_trip(self):
        t = InstructionTuple("do the thing", "with this input", "like so", "rt")
        assert parse_prompt(render_prompt(t), source_id="rt") == t


def test_jsonl_round_trip(tmp_path):
    tuples, _ = build_tuples([make_record(str(i), tags=("t",)) for i in range(3)])
    path = tmp_path / "instructions.jsonl"
    save_tuples(tuples, path)
    assert load_tuples(path) == tuples
