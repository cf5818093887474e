"""The 10-metric scoring suite over (response, golden answer) pairs.

Lexical metrics (BLEU, ROUGE-1/2/L) are implemented from their formulas.
Cosine similarity and BERTScore go through an embedding provider. The
no-answer rate counts responses that request clarification instead of
answering. LLM-Eval asks a judge model to compare each response against a
rephrased golden answer with seeded A/B position randomization.

BLEU here is BLEU-4 with add-one smoothing on the n>=2 n-gram counts and the
standard brevity penalty; ROUGE-N is the F1 over clipped n-gram overlap;
ROUGE-L is the F1 (beta=1) of LCS-based precision/recall.
"""

from __future__ import annotations

import logging
import math
import random
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .backends import BackendError, ChatClient, GenBackend, ResponseCache, cached_complete
from .embeddings import EmbeddingError, Granularity, cosine
from .fusion import GenerationRecord, StrategyKind
from .tokenizers import WS_PUNCT, Tokenizer

log = logging.getLogger(__name__)

METRIC_NAMES = (
    "bleu",
    "rouge1",
    "rouge2",
    "rougeL",
    "cosine_sim",
    "bertscore_p",
    "bertscore_r",
    "bertscore_f1",
    "nar",
    "llm_eval",
)

_TEMPLATE_DIR = Path(__file__).parent / "templates"


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, reference: str, tokenizer: Tokenizer = WS_PUNCT) -> float:
    """BLEU-4 of a candidate against a single reference."""
    cand = tokenizer(candidate)
    ref = tokenizer(reference)
    if not cand:
        return 0.0

    log_sum = 0.0
    for n in range(1, 5):
        cand_ngrams = _ngrams(cand, n)
        ref_ngrams = _ngrams(ref, n)
        clipped = sum(min(count, ref_ngrams[gram]) for gram, count in cand_ngrams.items())
        total = sum(cand_ngrams.values())
        if n == 1:
            if clipped == 0:
                return 0.0
            precision = clipped / total
        else:
            precision = (clipped + 1) / (total + 1)
        log_sum += math.log(precision)

    geo_mean = math.exp(log_sum / 4)
    brevity = 1.0 if len(cand) >= len(ref) else math.exp(1 - len(ref) / len(cand))
    return brevity * geo_mean


def rouge_n(candidate: str, reference: str, n: int, tokenizer: Tokenizer = WS_PUNCT) -> float:
    """ROUGE-N: F1 over clipped n-gram overlap.

    An empty reference scores 0. When both sides are shorter than n (so
    neither has any n-grams), identical token sequences score 1 so the
    identity invariant holds for texts of every length.
    """
    if n not in (1, 2):
        raise ValueError(f"rouge_n supports n in {{1, 2}}, got {n}")
    cand_tokens = tokenizer(candidate)
    ref_tokens = tokenizer(reference)
    if not ref_tokens:
        return 0.0
    cand_ngrams = _ngrams(cand_tokens, n)
    ref_ngrams = _ngrams(ref_tokens, n)
    if not ref_ngrams and not cand_ngrams:
        return 1.0 if cand_tokens == ref_tokens else 0.0
    if not ref_ngrams:
        return 0.0
    overlap = sum(min(count, ref_ngrams[gram]) for gram, count in cand_ngrams.items())
    cand_total = sum(cand_ngrams.values())
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / sum(ref_ngrams.values())
    if precision + recall == 0.0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        current = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                current[j] = previous[j - 1] + 1
            else:
                current[j] = max(previous[j], current[j - 1])
        previous = current
    return previous[len(b)]


def rouge_l(candidate: str, reference: str, tokenizer: Tokenizer = WS_PUNCT) -> float:
    """ROUGE-L: F1 (beta=1) of LCS-based precision and recall."""
    cand = tokenizer(candidate)
    ref = tokenizer(reference)
    if not cand or not ref:
        return 0.0
    lcs = _lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return 2 * precision * recall / (precision + recall)


def cosine_sim(candidate: str, reference: str, provider) -> float:
    """Cosine of the two sentence vectors, clamped to [0, 1]."""
    if provider.granularity is not Granularity.SENTENCE:
        raise ValueError("cosine_sim needs a sentence-granularity provider")
    result = provider.embed([candidate, reference], Granularity.SENTENCE)
    raw = cosine(result.vectors[0], result.vectors[1])
    log.debug("raw cosine %.6f", raw)
    return min(max(raw, 0.0), 1.0)


def bertscore(candidate: str, reference: str, provider) -> tuple[float, float, float]:
    """Greedy-matching precision/recall/F1 over token embeddings.

    No IDF weighting, no baseline rescaling. Negative similarities floor at
    zero so scores stay in [0, 1] for arbitrary encoders. Either side
    tokenizing to nothing yields (0, 0, 0) with a warning.
    """
    if provider.granularity is not Granularity.TOKEN:
        raise ValueError("bertscore needs a token-granularity provider")
    result = provider.embed([candidate, reference], Granularity.TOKEN)
    cand_vectors, ref_vectors = result.vectors[0], result.vectors[1]
    if not cand_vectors or not ref_vectors:
        log.warning("bertscore: a side tokenized to zero tokens; scoring (0, 0, 0)")
        return 0.0, 0.0, 0.0

    similarity = [[cosine(cv, rv) for rv in ref_vectors] for cv in cand_vectors]
    precision = sum(max(row) for row in similarity) / len(cand_vectors)
    recall = sum(max(similarity[i][j] for i in range(len(cand_vectors)))
                 for j in range(len(ref_vectors))) / len(ref_vectors)
    precision = max(precision, 0.0)
    recall = max(recall, 0.0)
    if precision + recall == 0.0:
        return 0.0, 0.0, 0.0
    f1 = 2 * precision * recall / (precision + recall)
    return precision, recall, f1


# Clarification-request phrasings. These must describe the act of asking the
# user for more input; trailing courtesy ("let me know if you need
# clarification") must not fire.
DEFAULT_NO_ANSWER_PATTERNS = tuple(
    re.compile(p, re.IGNORECASE)
    for p in (
        r"could you (?:please )?(?:provide|give|share) (?:me )?(?:some )?more (?:information|details|context)",
        r"could you (?:please )?clarify",
        r"can you (?:please )?clarify",
        r"please clarify your question",
        r"please provide more (?:information|details|context)",
        r"i(?:'|’)?m not (?:entirely )?sure what you(?:'re| are)? (?:asking|mean)",
        r"not sure what you mean",
        r"i (?:would )?need more (?:information|details|context) (?:to|before|about)",
        r"what (?:exactly )?do you mean by",
    )
)


def _load_template(name: str, template_dir: str | Path | None = None) -> str:
    directory = Path(template_dir) if template_dir else _TEMPLATE_DIR
    return (directory / name).read_text(encoding="utf-8")


def _detect_no_answer_ex(
    response: str,
    judge: GenBackend | None = None,
    *,
    client: ChatClient | None = None,
    cache: ResponseCache | None = None,
    question_id: str = "",
    patterns=DEFAULT_NO_ANSWER_PATTERNS,
    template_dir: str | Path | None = None,
) -> tuple[bool, str, bool]:
    """Returns (is_no_answer, tier_used, judge_fallback_flag)."""
    pattern_hit = any(p.search(response) for p in patterns)
    if judge is None or client is None:
        return pattern_hit, "pattern", False
    prompt = _load_template("judge_no_answer.txt", template_dir).format(response=response)
    try:
        reply, _ = cached_complete(
            client,
            judge,
            [{"role": "user", "content": prompt}],
            cache,
            question_id=question_id,
            strategy="nar_judge",
            prompt_key=prompt,
        )
    except BackendError as exc:
        log.warning("NAR judge failed for %s, falling back to patterns: %s", question_id, exc)
        return pattern_hit, "pattern", True
    verdict = re.search(r"\b(YES|NO)\b", reply.upper())
    if verdict is None:
        return pattern_hit, "pattern", True
    return verdict.group(1) == "YES", "judge", False


def detect_no_answer(
    response: str,
    judge: GenBackend | None = None,
    *,
    client: ChatClient | None = None,
    cache: ResponseCache | None = None,
    question_id: str = "",
    patterns=DEFAULT_NO_ANSWER_PATTERNS,
    template_dir: str | Path | None = None,
) -> bool:
    """True iff the response asks for clarification instead of answering.

    Tier 1 matches clarification-request phrasings anywhere in the response;
    when a judge backend is configured its verdict overrides the patterns.
    """
    result, _, _ = _detect_no_answer_ex(
        response,
        judge,
        client=client,
        cache=cache,
        question_id=question_id,
        patterns=patterns,
        template_dir=template_dir,
    )
    return result


def nar(
    records: list[GenerationRecord],
    judge: GenBackend | None = None,
    *,
    client: ChatClient | None = None,
    cache: ResponseCache | None = None,
    patterns=DEFAULT_NO_ANSWER_PATTERNS,
    template_dir: str | Path | None = None,
) -> float:
    """No-answer ratio: count of no-answer responses over all responses."""
    if not records:
        raise ValueError("nar needs a non-empty record list")
    hits = sum(
        1
        for record in records
        if detect_no_answer(
            record.response,
            judge,
            client=client,
            cache=cache,
            question_id=record.question_id,
            patterns=patterns,
            template_dir=template_dir,
        )
    )
    return hits / len(records)


_VERDICT_RE = re.compile(r"\b([AB])\b")


def _parse_verdict(reply: str) -> str | None:
    upper = reply.strip().upper()
    if re.search(r"\bTIE\b", upper):
        return "tie"
    match = _VERDICT_RE.search(upper)
    return match.group(1) if match else None


def llm_eval(
    records: list[GenerationRecord],
    golden: dict[str, str],
    judge: GenBackend,
    *,
    client: ChatClient,
    cache: ResponseCache | None = None,
    seed: int = 0,
    workers: int = 4,
    questions: dict[str, str] | None = None,
    template_dir: str | Path | None = None,
) -> tuple[float, dict[str, float], dict]:
    """Judge each response against a rephrased golden answer.

    Phase 1 rephrases every golden answer; phase 2 runs a pairwise judgment
    with the candidate placed at a seeded random A/B position. Ties, refusals,
    and verdicts that stay unparseable after one re-ask count as not superior.
    Returns (superior ratio, per-sample indicators, diagnostics).
    """
    if not records:
        raise ValueError("llm_eval needs a non-empty record list")
    missing = [r.question_id for r in records if r.question_id not in golden]
    if missing:
        raise ValueError(f"no golden answer for: {missing[:5]}")

    rephrase_template = _load_template("judge_rephrase.txt", template_dir)
    pairwise_template = _load_template("judge_pairwise.txt", template_dir)

    ordered = sorted(records, key=lambda r: r.question_id)
    rng = random.Random(seed)
    candidate_first = {record.question_id: rng.random() < 0.5 for record in ordered}

    def judge_call(question_id: str, prompt: str) -> str:
        reply, _ = cached_complete(
            client,
            judge,
            [{"role": "user", "content": prompt}],
            cache,
            question_id=question_id,
            strategy=f"llm_eval_{records[0].strategy.value}",
            prompt_key=prompt,
        )
        return reply

    def evaluate_one(record: GenerationRecord) -> tuple[str, float, str | None]:
        question_id = record.question_id
        try:
            rephrased = judge_call(
                question_id,
                rephrase_template.format(answer=golden[question_id]),
            )
            if candidate_first[question_id]:
                response_a, response_b = record.response, rephrased
                candidate_letter = "A"
            else:
                response_a, response_b = rephrased, record.response
                candidate_letter = "B"
            prompt = pairwise_template.format(
                question=(questions or {}).get(question_id, ""),
                response_a=response_a,
                response_b=response_b,
            )
            verdict = _parse_verdict(judge_call(question_id, prompt))
            if verdict is None:
                retry_prompt = prompt + "\n\nAnswer with exactly A or B."
                verdict = _parse_verdict(judge_call(question_id, retry_prompt))
                if verdict is None:
                    return question_id, 0.0, "unparsed_verdicts"
            if verdict == "tie":
                return question_id, 0.0, "ties"
            return question_id, (1.0 if verdict == candidate_letter else 0.0), None
        except BackendError as exc:
            log.warning("llm_eval judge failed for %s: %s", question_id, exc)
            return question_id, 0.0, "judge_failures"

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        results = list(pool.map(evaluate_one, ordered))

    diagnostics = {"unparsed_verdicts": 0, "judge_failures": 0, "ties": 0}
    per_sample: dict[str, float] = {}
    for question_id, indicator, flag in results:
        per_sample[question_id] = indicator
        if flag is not None:
            diagnostics[flag] += 1
    ratio = sum(per_sample.values()) / len(per_sample)
    return ratio, per_sample, diagnostics


@dataclass
class MetricReport:
    """Per-sample and aggregate values for all metrics of one strategy."""

    strategy: StrategyKind
    per_sample: dict[str, dict[str, float]] = field(default_factory=dict)
    aggregate: dict[str, float] = field(default_factory=dict)
    skipped: dict[str, str] = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "per_sample": self.per_sample,
            "aggregate": self.aggregate,
            "skipped": self.skipped,
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "MetricReport":
        return cls(
            strategy=StrategyKind(data["strategy"]),
            per_sample=data["per_sample"],
            aggregate=data["aggregate"],
            skipped=data.get("skipped", {}),
            diagnostics=data.get("diagnostics", {}),
        )


def evaluate_run(
    records: list[GenerationRecord],
    golden: dict[str, str],
    *,
    sentence_provider=None,
    token_provider=None,
    judge: GenBackend | None = None,
    client: ChatClient | None = None,
    cache: ResponseCache | None = None,
    seed: int = 0,
    workers: int = 4,
    nar_use_judge: bool = False,
    questions: dict[str, str] | None = None,
    tokenizer: Tokenizer = WS_PUNCT,
    template_dir: str | Path | None = None,
) -> MetricReport:
    """Compute the full metric suite for one strategy's generation records.

    A metric whose dependency is missing (no provider, no judge) is omitted
    from the report with an explicit skip reason, never silently zeroed.
    Failed generation records are excluded and counted in the diagnostics.
    """
    if not records:
        raise ValueError("evaluate_run needs a non-empty record list")
    strategy = records[0].strategy
    usable = [record for record in records if not record.failed]
    report = MetricReport(strategy=strategy)
    report.diagnostics["failed_records"] = len(records) - len(usable)
    report.diagnostics["nar_tier"] = "judge" if (nar_use_judge and judge) else "pattern"
    if not usable:
        for name in METRIC_NAMES:
            report.skipped[name] = "all records failed"
        return report

    per_sample: dict[str, dict[str, float]] = {record.question_id: {} for record in usable}

    for record in usable:
        reference = golden[record.question_id]
        cell = per_sample[record.question_id]
        cell["bleu"] = bleu(record.response, reference, tokenizer)
        cell["rouge1"] = rouge_n(record.response, reference, 1, tokenizer)
        cell["rouge2"] = rouge_n(record.response, reference, 2, tokenizer)
        cell["rougeL"] = rouge_l(record.response, reference, tokenizer)

    unmetricated = {"cosine_sim": 0, "bertscore": 0}
    raw_cosines: list[float] = []

    if sentence_provider is None:
        report.skipped["cosine_sim"] = "no sentence embedding provider configured"
    else:
        def one_cosine(record: GenerationRecord):
            try:
                result = sentence_provider.embed(
                    [record.response, golden[record.question_id]], Granularity.SENTENCE
                )
                raw = cosine(result.vectors[0], result.vectors[1])
                return record.question_id, raw
            except EmbeddingError as exc:
                log.warning("cosine provider failed for %s: %s", record.question_id, exc)
                return record.question_id, None

        with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
            for question_id, raw in pool.map(one_cosine, usable):
                if raw is None:
                    unmetricated["cosine_sim"] += 1
                else:
                    raw_cosines.append(raw)
                    per_sample[question_id]["cosine_sim"] = min(max(raw, 0.0), 1.0)

    if token_provider is None:
        for name in ("bertscore_p", "bertscore_r", "bertscore_f1"):
            report.skipped[name] = "no token embedding provider configured"
    else:
        def one_bertscore(record: GenerationRecord):
            try:
                return record.question_id, bertscore(
                    record.response, golden[record.question_id], token_provider
                )
            except EmbeddingError as exc:
                log.warning("bertscore provider failed for %s: %s", record.question_id, exc)
                return record.question_id, None

        with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
            for question_id, scores in pool.map(one_bertscore, usable):
                if scores is None:
                    unmetricated["bertscore"] += 1
                else:
                    p, r, f1 = scores
                    per_sample[question_id]["bertscore_p"] = p
                    per_sample[question_id]["bertscore_r"] = r
                    per_sample[question_id]["bertscore_f1"] = f1

    nar_judge = judge if (nar_use_judge and judge is not None and client is not None) else None
    for record in usable:
        indicator, _, flagged = _detect_no_answer_ex(
            record.response,
            nar_judge,
            client=client,
            cache=cache,
            question_id=record.question_id,
            template_dir=template_dir,
        )
        per_sample[record.question_id]["nar"] = 1.0 if indicator else 0.0
        if flagged:
            report.diagnostics.setdefault("nar_judge_fallbacks", 0)
            report.diagnostics["nar_judge_fallbacks"] += 1

    if judge is None or client is None:
        report.skipped["llm_eval"] = "no judge backend configured"
    else:
        ratio, llm_eval_samples, judge_diag = llm_eval(
            usable,
            golden,
            judge,
            client=client,
            cache=cache,
            seed=seed,
            workers=workers,
            questions=questions,
            template_dir=template_dir,
        )
        for question_id, indicator in llm_eval_samples.items():
            per_sample[question_id]["llm_eval"] = indicator
        report.diagnostics["llm_eval"] = judge_diag

    report.per_sample = per_sample
    for name in METRIC_NAMES:
        if name in report.skipped:
            continue
        values = [cell[name] for cell in per_sample.values() if name in cell]
        if not values:
            report.skipped[name] = "no samples could be scored"
            continue
        report.aggregate[name] = sum(values) / len(values)

    report.diagnostics["unmetricated"] = unmetricated
    if raw_cosines:
        report.diagnostics["cosine_raw_aggregate"] = sum(raw_cosines) / len(raw_cosines)
    return report
