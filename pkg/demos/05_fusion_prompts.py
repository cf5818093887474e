"""Compose the prompt for each of the five experimental arms.

Uses the offline mock backends, so this runs with zero network access.

Run:  python demos/05_fusion_prompts.py
"""

from pathlib import Path

from fusionqa import ChatClient, StrategyKind, build_index, chunk_docs, load_corpus, run_strategy
from fusionqa.bm25 import load_docs_dir
from fusionqa.mock import DryRunTransport, dryrun_backends

DATA = Path(__file__).resolve().parents[1] / "src" / "fusionqa" / "data"


def main() -> None:
    corpus = load_corpus(DATA / "toy_corpus.jsonl")
    docs = load_docs_dir(DATA / "toy_docs")
    chunks = chunk_docs(docs, 512, 64)
    index = build_index(chunks)
    chunk_map = {chunk.chunk_id: chunk for chunk in chunks}

    question = corpus[1]  # the function timeout question
    client = ChatClient(transport=DryRunTransport())
    backends = dryrun_backends()

    for strategy in StrategyKind:
        records = run_strategy(
            [question],
            strategy,
            backends,
            index if strategy.uses_bm25 else None,
            client=client,
            chunks=chunk_map if strategy.uses_bm25 else None,
        )
        record = records[0]
        print("=" * 72)
        print(f"{strategy.value}  (column: {strategy.column_label})")
        print("=" * 72)
        print(record.prompt[:600])
        print(f"\n--> response: {record.response[:160]}\n")


if __name__ == "__main__":
    main()
