"""Independent, from-the-formula metric implementations used as test oracles.

These are deliberate re-transcriptions of the metric definitions, kept free
of any imports from the package under test so the two routes cannot share a
bug. Favor clarity over speed.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from functools import lru_cache

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def ngram_counts(toks: list[str], n: int) -> Counter:
    return Counter(tuple(toks[i:i + n]) for i in range(len(toks) - n + 1))


def oracle_bleu(candidate: str, reference: str) -> float:
    cand, ref = tokens(candidate), tokens(reference)
    if not cand:
        return 0.0
    precisions = []
    for n in (1, 2, 3, 4):
        cand_grams = ngram_counts(cand, n)
        ref_grams = ngram_counts(ref, n)
        clipped = sum(min(count, ref_grams[gram]) for gram, count in cand_grams.items())
        total = sum(cand_grams.values())
        if n == 1:
            precisions.append(clipped / total if total else 0.0)
        else:
            precisions.append((clipped + 1) / (total + 1))
    if precisions[0] == 0.0:
        return 0.0
    geo_mean = math.exp(sum(math.log(p) for p in precisions) / 4)
    bp = 1.0 if len(cand) >= len(ref) else math.exp(1 - len(ref) / len(cand))
    return bp * geo_mean


def oracle_rouge_n(candidate: str, reference: str, n: int) -> float:
    cand_tokens, ref_tokens = tokens(candidate), tokens(reference)
    if not ref_tokens:
        return 0.0
    cand_grams = ngram_counts(cand_tokens, n)
    ref_grams = ngram_counts(ref_tokens, n)
    if not ref_grams and not cand_grams:
        # both sides shorter than n: identity convention
        return 1.0 if cand_tokens == ref_tokens else 0.0
    if not ref_grams:
        return 0.0
    overlap = sum(min(count, ref_grams[gram]) for gram, count in cand_grams.items())
    cand_total = sum(cand_grams.values())
    if cand_total == 0 or overlap == 0:
        return 0.0
    precision = overlap / cand_total
    recall = overlap / sum(ref_grams.values())
    return 2 * precision * recall / (precision + recall)


def oracle_lcs(a: tuple[str, ...], b: tuple[str, ...]) -> int:
    """Recursive LCS with memoization (different algorithm than the DP table)."""

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + go(i + 1, j + 1)
        return max(go(i + 1, j), go(i, j + 1))

    return go(0, 0)


def oracle_rouge_l(candidate: str, reference: str) -> float:
    cand, ref = tuple(tokens(candidate)), tuple(tokens(reference))
    if not cand or not ref:
        return 0.0
    lcs = oracle_lcs(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return 2 * precision * recall / (precision + recall)


def oracle_cosine(u: list[float], v: list[float]) -> float:
    dot = sum(a * b for a, b in zip(u, v))
    norm_u = math.sqrt(sum(a * a for a in u))
    norm_v = math.sqrt(sum(b * b for b in v))
    return dot / (norm_u * norm_v) if norm_u and norm_v else 0.0


def oracle_cosine_clamped(u: list[float], v: list[float]) -> float:
    return min(max(oracle_cosine(u, v), 0.0), 1.0)


def oracle_bertscore_onehot(candidate: str, reference: str) -> tuple[float, float, float]:
    """BERTScore under one-hot token embeddings reduces to set membership."""
    cand, ref = tokens(candidate), tokens(reference)
    if not cand or not ref:
        return 0.0, 0.0, 0.0
    ref_set, cand_set = set(ref), set(cand)
    precision = sum(1 for token in cand if token in ref_set) / len(cand)
    recall = sum(1 for token in ref if token in cand_set) / len(ref)
    if precision + recall == 0.0:
        return 0.0, 0.0, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


def oracle_bertscore_greedy(
    cand_vectors: list[list[float]], ref_vectors: list[list[float]]
) -> tuple[float, float, float]:
    """Greedy matching straight from the definition, over explicit vectors."""
    if not cand_vectors or not ref_vectors:
        return 0.0, 0.0, 0.0
    precision = sum(
        max(oracle_cosine(cv, rv) for rv in ref_vectors) for cv in cand_vectors
    ) / len(cand_vectors)
    recall = sum(
        max(oracle_cosine(cv, rv) for cv in cand_vectors) for rv in ref_vectors
    ) / len(ref_vectors)
    precision = max(precision, 0.0)
    recall = max(recall, 0.0)
    if precision + recall == 0.0:
        return 0.0, 0.0, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)
