from __future__ import annotations

import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_record
from fusionqa.cleaning import (
    CleanSettings,
    collapse_newlines,
    detect_image_sample,
    label_over_length,
    normalize_links,
    run_pipeline,
    split_fenced,
    strip_boilerplate,
    strip_decoration,
    strip_user_ids,
)
from fusionqa.dataset import OVER_LENGTH
from fusionqa.tokenizers import WS_PUNCT

BOILERPLATE = "please don't forget to upvote and Accept as answer if the reply is helpful"


class TestStripUserIds:
    def test_removes_handle_and_fixes_spacing(self):
        assert strip_user_ids("thanks bob@1234567 for the tip") == "thanks for the tip"

    def test_noop_without_ids(self):
        assert strip_user_ids("no ids here") == "no ids here"

    def test_two_ids_with_punctuation(self):
        assert strip_user_ids("ping alice@0000001, then bob@1234567.") == "ping, then."

    def test_id_at_line_start(self):
        assert strip_user_ids("bob@9876543 wrote this") == "wrote this"

    def test_short_numeric_suffix_survives(self):
        # fewer than five digits is not an id
        assert strip_user_ids("see issue bob@123 there") == "see issue bob@123 there"

    def test_ids_inside_code_fence_survive(self):
        text = "```\nlog: bob@1234567\n```"
        assert strip_user_ids(text) == text


class TestNormalizeLinks:
    def test_html_anchor(self):
        assert (
            normalize_links('<a href="https://x.com/doc">doc page</a>')
            == "[doc page](https://x.com/doc)"
        )

    def test_bare_url_uses_itself_as_description(self):
        assert (
            normalize_links("see https://x.com/doc")
            == "see [https://x.com/doc](https://x.com/doc)"
        )

    def test_already_normalized_is_idempotent(self):
        assert normalize_links("[ok](https://x.com)") == "[ok](https://x.com)"

    def test_empty_target_markdown(self):
        assert (
            normalize_links("[https://x.com/p]()")
            == "[https://x.com/p](https://x.com/p)"
        )

    def test_trailing_punctuation_stays_outside(self):
        assert (
            normalize_links("read https://x.com/doc.")
            == "read [https://x.com/doc](https://x.com/doc)."
        )

    def test_idempotent_on_own_output(self):
        text = 'mix <a href="https://a.io">A</a> and https://b.io/page here'
        once = normalize_links(text)
        assert normalize_links(once) == once

    def test_urls_in_code_fence_untouched(self):
        text = "```\ncurl https://x.com/doc\n```"
        assert normalize_links(text) == text


class TestStripBoilerplate:
    def test_paper_footer_with_dashes(self):
        text = f"Yes.\n--{BOILERPLATE}--"
        assert strip_boilerplate(text) == "Yes."

    def test_noop_without_pattern(self):
        assert strip_boilerplate("Yes.") == "Yes."

    def test_embedded_twice_both_removed(self):
        text = f"Start.\n--{BOILERPLATE}--\nMiddle.\n{BOILERPLATE}\nEnd."
        cleaned = strip_boilerplate(text)
        assert "upvote" not in cleaned.lower()
        assert "Start." in cleaned and "Middle." in cleaned and "End." in cleaned

    def test_case_insensitive_and_wrapped(self):
        wrapped = "PLEASE don't forget\nto upvote and accept as Answer if the reply is helpful"
        assert strip_boilerplate(f"Sure.\n{wrapped}").strip() == "Sure."

    def test_requires_patterns(self):
        with pytest.raises(ValueError):
            strip_boilerplate("x", patterns=())


class TestStripDecoration:
    def test_star_separator_line_removed(self):
        assert strip_decoration("above\n****\nbelow") == "above\nbelow"

    def test_longer_runs_and_other_chars(self):
        assert strip_decoration("a\n=======\nb\n---------\nc") == "a\nb\nc"

    def test_three_char_rule_survives(self):
        assert strip_decoration("a\n---\nb") == "a\n---\nb"

    def test_inline_bold_untouched(self):
        assert strip_decoration("this is **bold** text") == "this is **bold** text"


class TestCollapseNewlines:
    def test_runs_collapse_to_one(self):
        assert collapse_newlines("a\n\n\nb")[0] == "a\nb"

    def test_code_fence_preserved(self):
        text = "```\nx\n\n\ny\n```"
        assert collapse_newlines(text)[0] == text

    def test_crlf_normalized(self):
        assert collapse_newlines("a\r\n\r\nb")[0] == "a\nb"

    def test_spaces_not_merged(self):
        assert collapse_newlines("a    b")[0] == "a    b"

    def test_unterminated_fence_preserved_with_warning(self):
        text = "before\n\n\n```\ncode\n\n\nmore"
        cleaned, warnings = collapse_newlines(text)
        assert cleaned == "before\n```\ncode\n\n\nmore"
        assert warnings


class TestDetectImageSample:
    def test_markdown_image(self):
        assert detect_image_sample("![err](https://x/a.png)")

    def test_plain_text(self):
        assert not detect_image_sample("plain text question")

    def test_case_insensitive_extension(self):
        assert detect_image_sample("see https://x/shot.PNG please")

    def test_html_img_element(self):
        assert detect_image_sample('broken <img src="https://x/s.jpeg"> here')

    def test_non_image_url(self):
        assert not detect_image_sample("see https://x.com/doc.html please")


class TestLabelOverLength:
    def test_short_question_unlabeled(self):
        assert label_over_length("short question", WS_PUNCT, 8192) is None

    def test_boundary_plus_one_labeled(self):
        text = " ".join(f"t{i}" for i in range(8193))
        assert label_over_length(text, WS_PUNCT, 8192) == OVER_LENGTH

    def test_exact_boundary_unlabeled(self):
        text = " ".join(f"t{i}" for i in range(8192))
        assert label_over_length(text, WS_PUNCT, 8192) is None

    def test_rejects_nonpositive_limit(self):
        with pytest.raises(ValueError):
            label_over_length("x", WS_PUNCT, 0)


def _fences(text: str) -> list[str]:
    segments, _ = split_fenced(text)
    return sorted(segment for is_code, segment in segments if is_code)


class TestRunPipeline:
    def test_image_record_dropped(self):
        corpus = [make_record(str(i)) for i in range(5)]
        corpus.append(make_record("img", question="look ![s](https://x/a.png)"))
        cleaned, report = run_pipeline(corpus)
        assert report.input_count == 6
        assert report.output_count == 5
        assert report.dropped_ids == ["img"]

    def test_clean_corpus_is_fixed_point(self):
        corpus = [make_record(str(i), question=f"question {i} text", answer="fine answer") for i in range(4)]
        cleaned, report = run_pipeline(corpus)
        assert cleaned == corpus
        mutating = ("STRIP_USER_IDS", "NORMALIZE_LINKS", "STRIP_BOILERPLATE", "STRIP_DECORATION")
        assert all(report.per_rule_hits[rule] == 0 for rule in mutating)

    def test_planted_defects_all_hit(self):
        corpus = [
            make_record("u", question="thanks bob@1234567 again", answer="ok sure"),
            make_record("l", question="see https://x.com/doc now", answer="ok sure"),
            make_record("b", answer=f"Yes.\n--{BOILERPLATE}--"),
            make_record("d", answer="before\n****\nafter"),
            make_record("n", answer="a\n\n\nb"),
            make_record("i", question="shot ![x](https://a/b.png)"),
            make_record("o", question=" ".join(f"w{i}" for i in range(8193))),
        ]
        cleaned, report = run_pipeline(corpus)
        hits = report.per_rule_hits
        assert hits["STRIP_USER_IDS"] == 1
        assert hits["NORMALIZE_LINKS"] == 1
        assert hits["STRIP_BOILERPLATE"] == 1
        assert hits["STRIP_DECORATION"] == 1
        assert hits["COLLAPSE_NEWLINES"] == 1
        assert hits["DROP_IMAGE_SAMPLES"] == 1
        assert hits["LABEL_OVER_LENGTH"] == 1
        assert report.dropped_ids == ["i"]
        by_id = {record.id: record for record in cleaned}
        assert OVER_LENGTH in by_id["o"].flags

    def test_idempotent(self):
        corpus = [
            make_record("a", question="hi bob@1234567\n\n\nsee https://x.io/d", answer="ok then"),
            make_record("b", answer=f"Sure.\n--{BOILERPLATE}--\n****\ndone"),
        ]
        once, _ = run_pipeline(corpus)
        twice, report = run_pipeline(once)
        assert once == twice
        mutating = ("STRIP_USER_IDS", "NORMALIZE_LINKS", "STRIP_BOILERPLATE", "STRIP_DECORATION", "COLLAPSE_NEWLINES")
        assert all(report.per_rule_hits[rule] == 0 for rule in mutating)

    def test_emptied_record_dropped_as_malformed(self):
        corpus = [make_record("gone", question="****", answer="fine")]
        cleaned, report = run_pipeline(corpus)
        assert cleaned == []
        assert report.dropped_ids == ["gone"]

    def test_over_length_not_dropped(self):
        long_question = " ".join(f"w{i}" for i in range(8193))
        corpus = [make_record("long", question=long_question)]
        cleaned, report = run_pipeline(corpus)
        assert len(cleaned) == 1
        assert OVER_LENGTH in cleaned[0].flags

    def test_code_fences_preserved_through_pipeline(self):
        fence = "```\nbob@1234567 https://x.io/a\n\n\n****\n```"
        corpus = [make_record("c", question=f"intro\n\n\n{fence}\ntail bob@1234567", answer="ok then")]
        cleaned, _ = run_pipeline(corpus)
        assert _fences(cleaned[0].question) == [fence]
        assert "tail bob@1234567" not in cleaned[0].question

    def test_custom_settings_extra_patterns(self):
        settings_ = CleanSettings(
            user_id_patterns=("[A-Za-z][A-Za-z0-9._-]*@\\d{5,}", "user-\\d{4}"),
            boilerplate_patterns=("mark as resolved",),
        )
        corpus = [make_record("x", question="hi user-1234 there", answer="done. mark as resolved")]
        cleaned, _ = run_pipeline(corpus, settings=settings_)
        assert cleaned[0].question == "hi there"
        assert "resolved" not in cleaned[0].answer


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.sampled_from(
            [
                "plain words here",
                "thanks bob@1234567 much",
                "see https://x.com/a and <a href=\"https://b.io\">b</a>",
                "****",
                "a\n\n\n\nb",
                f"--{BOILERPLATE}--",
                "```\nkeep  this\n\n\nexact bob@1234567\n```",
                "tail  spaces   kept",
            ]
        ),
        min_size=1,
        max_size=6,
    )
)
def test_pipeline_properties_hold(parts):
    text = "\n".join(parts)
    corpus = [make_record("p", question=text + " q", answer=text + " a")]
    cleaned, _ = run_pipeline(corpus)
    if not cleaned:  # everything stripped away: nothing left to check
        return
    record = cleaned[0]
    for value in (record.question, record.answer):
        segments, _ = split_fenced(value)
        for is_code, segment in segments:
            if is_code:
                continue
            assert "\n\n" not in segment
            assert not re.search(r"(?m)^[ \t]*([^\w\s])\1{3,}[ \t]*$", segment)
    # fenced blocks survive rules 1-5 byte-for-byte
    assert _fences(record.question) == _fences(text + " q")
    assert _fences(record.answer) == _fences(text + " a")
