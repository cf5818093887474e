"""Build expert-tuning instruction tuples and render one as a full prompt.

Run:  python demos/03_instructions.py
"""

from pathlib import Path

from fusionqa import build_tuples, load_corpus, render_prompt, split

TOY = Path(__file__).resolve().parents[1] / "src" / "fusionqa" / "data" / "toy_corpus.jsonl"


def main() -> None:
    corpus = load_corpus(TOY)
    result = split(corpus, ratio=0.8, seed=27182)
    by_id = {record.id: record for record in corpus}
    train = [by_id[record_id] for record_id in result.train]

    tuples, report = build_tuples(train)
    print(f"built {report.total} tuples ({report.fallback_count} tagless fallbacks)\n")

    print("one tuple rendered as a tuning prompt:")
    print("-" * 72)
    print(render_prompt(tuples[0]))
    print("-" * 72)


if __name__ == "__main__":
    main()
