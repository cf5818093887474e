"""Corpus statistics and the deterministic train/test split on the bundled toy corpus.

Run:  python demos/02_stats_and_split.py
"""

from pathlib import Path

from fusionqa import compute_stats, load_corpus, split

TOY = Path(__file__).resolve().parents[1] / "src" / "fusionqa" / "data" / "toy_corpus.jsonl"


def main() -> None:
    corpus = load_corpus(TOY)
    stats = compute_stats(corpus)
    print(f"records:            {stats.record_count}")
    print(f"distinct tags:      {stats.tag_count}")
    print(f"avg tags/question:  {stats.avg_tags_per_question:.2f}")
    print(f"avg question toks:  {stats.avg_question_tokens:.2f}  ({stats.tokenizer_id})")
    print(f"avg answer toks:    {stats.avg_answer_tokens:.2f}")
    print(f"avg upvotes/sample: {stats.avg_sample_upvotes:.2f}")
    print(f"date range (days):  {stats.date_range_days}")

    result = split(corpus, ratio=0.8, seed=27182)
    print(f"\n80/20 split under seed {result.seed}:")
    print(f"  train ({len(result.train)}): {', '.join(result.train)}")
    print(f"  test  ({len(result.test)}): {', '.join(result.test)}")

    again = split(corpus, ratio=0.8, seed=27182)
    print(f"  deterministic: {result == again}")


if __name__ == "__main__":
    main()
