"""Seven-rule filtering pipeline that turns raw forum dumps into research-grade records.

Rules run in a fixed order: strip user ids, normalize links, strip platform
boilerplate, strip decoration lines, collapse newline runs, drop image-bearing
samples, label over-length questions. Rules 1-5 are text transforms applied to
both question and answer; rule 6 drops the whole record; rule 7 only labels.

Fenced code blocks are exempt from rules 1-5: their content is byte-preserved.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from enum import Enum

from .dataset import HAS_IMAGE, OVER_LENGTH, QARecord
from .tokenizers import WS_PUNCT, Tokenizer

log = logging.getLogger(__name__)


class RuleId(Enum):
    STRIP_USER_IDS = "STRIP_USER_IDS"
    NORMALIZE_LINKS = "NORMALIZE_LINKS"
    STRIP_BOILERPLATE = "STRIP_BOILERPLATE"
    STRIP_DECORATION = "STRIP_DECORATION"
    COLLAPSE_NEWLINES = "COLLAPSE_NEWLINES"
    DROP_IMAGE_SAMPLES = "DROP_IMAGE_SAMPLES"
    LABEL_OVER_LENGTH = "LABEL_OVER_LENGTH"


RULE_ORDER = tuple(RuleId)


@dataclass(frozen=True)
class CleanRule:
    rule_id: RuleId
    enabled: bool = True


def default_rules() -> tuple[CleanRule, ...]:
    return tuple(CleanRule(rule_id) for rule_id in RULE_ORDER)


@dataclass
class CleanReport:
    """Tally of what the pipeline did; hits count records a rule changed."""

    input_count: int = 0
    output_count: int = 0
    dropped_ids: list[str] = field(default_factory=list)
    per_rule_hits: dict[str, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "input_count": self.input_count,
            "output_count": self.output_count,
            "dropped_ids": self.dropped_ids,
            "per_rule_hits": self.per_rule_hits,
            "warnings": self.warnings,
        }


# The platform-generated reply footer observed on the source forum.
DEFAULT_BOILERPLATE_PATTERNS = (
    "please don't forget to upvote and Accept as answer if the reply is helpful",
)

# word@digits with at least five digits; extra patterns come from config.
DEFAULT_USER_ID_PATTERNS = (r"[A-Za-z][A-Za-z0-9._-]*@\d{5,}",)

IMAGE_EXTENSIONS = ("png", "jpg", "jpeg", "gif", "bmp", "webp")

DEFAULT_OVER_LENGTH_LIMIT = 8192

_FENCE_RE = re.compile(r"^[ \t]{0,3}(```|~~~)", re.MULTILINE)


def split_fenced(text: str) -> tuple[list[tuple[bool, str]], bool]:
    """Split text into (is_code, segment) runs at code-fence boundaries.

    Fences themselves belong to the code segment. Returns the segments and
    whether an unterminated fence was found (the remainder is then treated
    as code so it is preserved).
    """
    segments: list[tuple[bool, str]] = []
    pos = 0
    unterminated = False
    while True:
        opening = _FENCE_RE.search(text, pos)
        if opening is None:
            if pos < len(text):
                segments.append((False, text[pos:]))
            break
        if opening.start() > pos:
            segments.append((False, text[pos:opening.start()]))
        closing = re.compile(
            r"^[ \t]{0,3}" + re.escape(opening.group(1)) + r"[ \t]*$", re.MULTILINE
        ).search(text, opening.end())
        if closing is None:
            segments.append((True, text[opening.start():]))
            unterminated = True
            break
        segments.append((True, text[opening.start():closing.end()]))
        pos = closing.end()
    return segments, unterminated


def _apply_outside_fences(text: str, transform) -> tuple[str, bool]:
    """Run ``transform`` on non-code segments only; report unterminated fences."""
    segments, unterminated = split_fenced(text)
    out = []
    for is_code, segment in segments:
        out.append(segment if is_code else transform(segment))
    return "".join(out), unterminated


def _compile_user_id_patterns(patterns: tuple[str, ...]) -> list[re.Pattern]:
    return [re.compile(p) for p in patterns]


def strip_user_ids(text: str, patterns: tuple[str, ...] = DEFAULT_USER_ID_PATTERNS) -> str:
    """Remove user handles of the form word@12345, normalizing the whitespace damage."""

    def transform(segment: str) -> str:
        for compiled in _compile_user_id_patterns(patterns):
            raw = compiled.pattern
            # Consume the preceding run of spaces so "thanks bob@123456 for"
            # becomes "thanks for" and "ping alice@000001," becomes "ping,".
            segment = re.sub(r"[ \t]+(?:" + raw + r")", "", segment)
            # Handle at line start: consume the trailing spaces instead.
            segment = re.sub(r"(?m)^(?:" + raw + r")[ \t]*", "", segment)
            segment = re.sub(raw, "", segment)
        return segment

    result, _ = _apply_outside_fences(text, transform)
    return result


_HTML_ANCHOR_RE = re.compile(
    r"<a\s+[^>]*href\s*=\s*[\"']([^\"']+)[\"'][^>]*>(.*?)</a>",
    re.IGNORECASE | re.DOTALL,
)
# Markdown link whose target is empty: [https://x]() -> [https://x](https://x)
_EMPTY_TARGET_RE = re.compile(r"\[([^\]\n]+)\]\(\s*\)")
# Bare URL not already part of a markdown construct ("](", "(", "[", "<" prefixes).
_BARE_URL_RE = re.compile(r"(?<![(\[<\"'=])\bhttps?://[^\s<>()\[\]]+")


def normalize_links(text: str) -> str:
    """Rewrite every hyperlink into the unified "[description](link)" form.

    HTML anchors keep their inner text as the description; bare URLs and
    empty-target markdown links use the URL itself as the description.
    Already-normalized links are left untouched (the rewrite is idempotent).
    """

    def transform(segment: str) -> str:
        def anchor_sub(m: re.Match) -> str:
            url = m.group(1).strip()
            desc = re.sub(r"\s+", " ", m.group(2)).strip() or url
            return f"[{desc}]({url})"

        segment = _HTML_ANCHOR_RE.sub(anchor_sub, segment)

        def empty_target_sub(m: re.Match) -> str:
            inner = m.group(1).strip()
            return f"[{inner}]({inner})" if inner.lower().startswith(("http://", "https://")) else m.group(0)

        segment = _EMPTY_TARGET_RE.sub(empty_target_sub, segment)

        def bare_sub(m: re.Match) -> str:
            url = m.group(0)
            trailing = ""
            while url and url[-1] in ".,;:!?":
                trailing = url[-1] + trailing
                url = url[:-1]
            return f"[{url}]({url}){trailing}"

        return _BARE_URL_RE.sub(bare_sub, segment)

    result, _ = _apply_outside_fences(text, transform)
    return result


def _flexible_pattern(pattern: str) -> str:
    """Compile a boilerplate phrase into a whitespace- and apostrophe-tolerant regex."""
    parts = []
    for word in pattern.split():
        piece = []
        for char in word:
            if char in ("'", "’"):
                piece.append("['’]")
            else:
                piece.append(re.escape(char))
        parts.append("".join(piece))
    return r"\s+".join(parts)


def strip_boilerplate(text: str, patterns: tuple[str, ...] = DEFAULT_BOILERPLATE_PATTERNS) -> str:
    """Remove every occurrence of each platform boilerplate phrase.

    Matching is case-insensitive and tolerant of wrapped lines and the
    leading/trailing dash decorations the platform injects around the phrase.
    A line left holding only the phrase is removed entirely.
    """
    if not patterns:
        raise ValueError("strip_boilerplate requires at least one pattern")

    def transform(segment: str) -> str:
        for pattern in patterns:
            flex = _flexible_pattern(pattern)
            line_re = re.compile(
                r"(?:^|\n)[ \t]*-*[ \t]*" + flex + r"[ \t.!]*-*[ \t]*(?=$|\n)",
                re.IGNORECASE,
            )
            inline_re = re.compile(r"[ \t]*-*[ \t]*" + flex + r"[ \t]*-*", re.IGNORECASE)
            segment = line_re.sub("", segment)
            segment = inline_re.sub("", segment)
        return segment

    result, _ = _apply_outside_fences(text, transform)
    return result


_DECORATION_LINE_RE = re.compile(r"(?m)^[ \t]*([^\w\s])\1{3,}[ \t]*\n?")


def strip_decoration(text: str) -> str:
    """Drop decoration lines: a run of 4+ identical punctuation characters alone on a line."""

    def transform(segment: str) -> str:
        return _DECORATION_LINE_RE.sub("", segment)

    result, _ = _apply_outside_fences(text, transform)
    return result


def collapse_newlines(text: str) -> tuple[str, list[str]]:
    """Collapse runs of blank lines outside code fences into a single line break.

    Line endings are normalized to LF first (CRLF and CR count as breaks).
    Horizontal space runs within a line are left alone; code fence content is
    byte-preserved. An unterminated fence preserves the remainder of the text
    and is reported as a warning.
    """
    warnings: list[str] = []

    def transform(segment: str) -> str:
        segment = segment.replace("\r\n", "\n").replace("\r", "\n")
        return re.sub(r"\n(?:[ \t]*\n)+", "\n", segment)

    segments, unterminated = split_fenced(text)
    if unterminated:
        warnings.append("unterminated code fence: remainder preserved as code")
    out = []
    for is_code, segment in segments:
        out.append(segment if is_code else transform(segment))
    return "".join(out), warnings


_MD_IMAGE_RE = re.compile(r"!\[[^\]]*\]\([^)]*\)")
_HTML_IMG_RE = re.compile(r"<img\b[^>]*>", re.IGNORECASE)
_IMAGE_URL_RE = re.compile(
    r"https?://\S+?\.(?:" + "|".join(IMAGE_EXTENSIONS) + r")\b",
    re.IGNORECASE,
)


def detect_image_sample(question: str) -> bool:
    """True iff the question contains an image link (markdown, raster URL, or <img>)."""
    return bool(
        _MD_IMAGE_RE.search(question)
        or _HTML_IMG_RE.search(question)
        or _IMAGE_URL_RE.search(question)
    )


def label_over_length(
    question: str,
    tokenizer: Tokenizer = WS_PUNCT,
    limit: int = DEFAULT_OVER_LENGTH_LIMIT,
) -> str | None:
    """Return the OVER_LENGTH flag iff the question has strictly more than ``limit`` tokens."""
    if limit <= 0:
        raise ValueError(f"over-length limit must be positive, got {limit}")
    return OVER_LENGTH if tokenizer.count(question) > limit else None


@dataclass(frozen=True)
class CleanSettings:
    """Knobs for the pipeline; defaults match the shipped rule set."""

    user_id_patterns: tuple[str, ...] = DEFAULT_USER_ID_PATTERNS
    boilerplate_patterns: tuple[str, ...] = DEFAULT_BOILERPLATE_PATTERNS
    over_length_limit: int = DEFAULT_OVER_LENGTH_LIMIT
    tokenizer: Tokenizer = WS_PUNCT


def run_pipeline(
    corpus: list[QARecord],
    rules: tuple[CleanRule, ...] | None = None,
    settings: CleanSettings | None = None,
) -> tuple[list[QARecord], CleanReport]:
    """Apply the filtering pipeline to a corpus.

    Rules 1-5 transform question and answer text, rule 6 drops image-bearing
    records, rule 7 labels over-length questions. Records whose question or
    answer comes out empty are malformed and dropped. The report tallies, per
    rule, how many records it changed.
    """
    rules = rules if rules is not None else default_rules()
    settings = settings or CleanSettings()
    _check_rule_order(rules)
    enabled = {rule.rule_id for rule in rules if rule.enabled}

    report = CleanReport(input_count=len(corpus))
    report.per_rule_hits = {rule_id.value: 0 for rule_id in RULE_ORDER}

    text_rules: list[tuple[RuleId, callable]] = []
    if RuleId.STRIP_USER_IDS in enabled:
        text_rules.append(
            (RuleId.STRIP_USER_IDS, lambda t: strip_user_ids(t, settings.user_id_patterns))
        )
    if RuleId.NORMALIZE_LINKS in enabled:
        text_rules.append((RuleId.NORMALIZE_LINKS, normalize_links))
    if RuleId.STRIP_BOILERPLATE in enabled:
        text_rules.append(
            (RuleId.STRIP_BOILERPLATE, lambda t: strip_boilerplate(t, settings.boilerplate_patterns))
        )
    if RuleId.STRIP_DECORATION in enabled:
        text_rules.append((RuleId.STRIP_DECORATION, strip_decoration))

    output: list[QARecord] = []
    for record in corpus:
        question, answer = record.question, record.answer
        for rule_id, transform in text_rules:
            new_q, new_a = transform(question), transform(answer)
            if new_q != question or new_a != answer:
                report.per_rule_hits[rule_id.value] += 1
            question, answer = new_q, new_a

        if RuleId.COLLAPSE_NEWLINES in enabled:
            new_q, q_warn = collapse_newlines(question)
            new_a, a_warn = collapse_newlines(answer)
            if new_q != question or new_a != answer:
                report.per_rule_hits[RuleId.COLLAPSE_NEWLINES.value] += 1
            for warning in q_warn + a_warn:
                report.warnings.append(f"{record.id}: {warning}")
            question, answer = new_q, new_a

        if RuleId.DROP_IMAGE_SAMPLES in enabled and detect_image_sample(question):
            report.per_rule_hits[RuleId.DROP_IMAGE_SAMPLES.value] += 1
            report.dropped_ids.append(record.id)
            continue

        if not question.strip() or not answer.strip():
            report.warnings.append(f"{record.id}: empty question or answer after cleaning")
            report.dropped_ids.append(record.id)
            continue

        flags = set(record.flags)
        flags.discard(OVER_LENGTH)
        flags.discard(HAS_IMAGE)
        if RuleId.LABEL_OVER_LENGTH in enabled:
            flag = label_over_length(question, settings.tokenizer, settings.over_length_limit)
            if flag is not None:
                flags.add(flag)
                report.per_rule_hits[RuleId.LABEL_OVER_LENGTH.value] += 1

        output.append(record.replace(question=question, answer=answer, flags=frozenset(flags)))

    report.output_count = len(output)
    return output, report


def _check_rule_order(rules: tuple[CleanRule, ...]) -> None:
    positions = {rule_id: i for i, rule_id in enumerate(RULE_ORDER)}
    indices = [positions[rule.rule_id] for rule in rules]
    if indices != sorted(indices):
        raise ValueError("clean rules must be given in canonical order")
