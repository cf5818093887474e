#!/usr/bin/env python
"""Regenerate the golden expectation file for the end-to-end dry run.

Expected table cells are computed here from the canned mock fixtures using
the independent oracle implementations (never the package's metric code)
and frozen into tests/data/golden_eval.json.

    python tests/gen_golden.py
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

TESTS = Path(__file__).resolve().parent
ROOT = TESTS.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(TESTS))

from oracle_metrics import (  # noqa: E402
    oracle_bertscore_onehot,
    oracle_bleu,
    oracle_cosine_clamped,
    oracle_rouge_l,
    oracle_rouge_n,
    tokens,
)

from fusionqa.dataset import load_corpus, split  # noqa: E402
from fusionqa.mock import REPHRASE_SUFFIX, question_fingerprint  # noqa: E402

DATA_DIR = ROOT / "src" / "fusionqa" / "data"
STRATEGIES = ("EXPERT_ONLY", "LLM_ONLY", "LLM_BM25", "LLM_EXPERT", "LLM_BM25_EXPERT")

# Refusal plan fixed by tools/gen_toy_fixtures.py: first two test ids (sorted)
# refuse under LLM_ONLY, the first one under LLM_BM25.
REFUSALS = {
    "LLM_ONLY": ("q001", "q002"),
    "LLM_BM25": ("q001",),
}


def hash_bag_vector(text: str, dimension: int = 64) -> list[float]:
    """Re-transcription of the dry-run sentence stub: bag of sha1-hashed tokens."""
    vec = [0.0] * dimension
    for token in tokens(text):
        bucket = int.from_bytes(hashlib.sha1(token.encode("utf-8")).digest()[:4], "big") % dimension
        vec[bucket] += 1.0
    return vec


def main() -> None:
    corpus = load_corpus(DATA_DIR / "toy_corpus.jsonl")
    result = split(corpus, ratio=0.5, seed=7)
    by_id = {record.id: record for record in corpus}
    test_records = [by_id[record_id] for record_id in result.test]

    with open(DATA_DIR / "mock_responses.json", encoding="utf-8") as f:
        canned = json.load(f)

    def response_for(record, strategy: str) -> str:
        fingerprint = question_fingerprint(record.question)
        if strategy == "EXPERT_ONLY":
            return canned["opinions"][fingerprint]
        return canned["responses"][fingerprint][strategy]

    golden: dict[str, dict[str, float]] = {}
    for strategy in STRATEGIES:
        cells: dict[str, list[float]] = {name: [] for name in (
            "bleu", "rouge1", "rouge2", "rougeL", "cosine_sim",
            "bertscore_p", "bertscore_r", "bertscore_f1", "nar", "llm_eval",
        )}
        for record in test_records:
            response = response_for(record, strategy)
            reference = record.answer
            cells["bleu"].append(oracle_bleu(response, reference))
            cells["rouge1"].append(oracle_rouge_n(response, reference, 1))
            cells["rouge2"].append(oracle_rouge_n(response, reference, 2))
            cells["rougeL"].append(oracle_rouge_l(response, reference))
            cells["cosine_sim"].append(
                oracle_cosine_clamped(hash_bag_vector(response), hash_bag_vector(reference))
            )
            p, r, f1 = oracle_bertscore_onehot(response, reference)
            cells["bertscore_p"].append(p)
            cells["bertscore_r"].append(r)
            cells["bertscore_f1"].append(f1)

            is_refusal = record.id in REFUSALS.get(strategy, ())
            cells["nar"].append(1.0 if is_refusal else 0.0)

            rephrased_length = len(reference + REPHRASE_SUFFIX)
            if len(response) == rephrased_length:
                raise SystemExit(f"{record.id}/{strategy}: length tie against rephrased golden")
            cells["llm_eval"].append(1.0 if len(response) > rephrased_length else 0.0)

        golden[strategy] = {name: sum(values) / len(values) for name, values in cells.items()}

    out_path = TESTS / "data" / "golden_eval.json"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as f:
        json.dump(
            {
                "test_ids": sorted(result.test),
                "seed": {"split": 7, "ratio": 0.5},
                "aggregates": golden,
            },
            f,
            indent=2,
            sort_keys=True,
        )
        f.write("\n")
    print(f"wrote {out_path}")
    for strategy in STRATEGIES:
        print(strategy, {k: round(v, 4) for k, v in sorted(golden[strategy].items())})


if __name__ == "__main__":
    main()
