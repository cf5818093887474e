"""Chunk the toy docs tree, build the BM25 index, and run a few searches.

Run:  python demos/04_bm25_retrieval.py
"""

from pathlib import Path

from fusionqa import build_index, chunk_docs, search
from fusionqa.bm25 import load_docs_dir

DOCS = Path(__file__).resolve().parents[1] / "src" / "fusionqa" / "data" / "toy_docs"

QUERIES = (
    "function timeout consumption plan",
    "delete old blobs automatically",
    "change meeting organizer",
)


def main() -> None:
    docs = load_docs_dir(DOCS)
    chunks = chunk_docs(docs, target_tokens=512, overlap_tokens=64)
    index = build_index(chunks)
    by_id = {chunk.chunk_id: chunk for chunk in chunks}

    print(f"{len(docs)} docs -> {len(chunks)} chunks, avg length {index.avg_doc_length:.1f} tokens\n")
    for query in QUERIES:
        print(f"query: {query!r}")
        for rank, (chunk_id, score) in enumerate(search(index, query, k=3), 1):
            chunk = by_id[chunk_id]
            trail = " > ".join(chunk.heading_trail) or "(preamble)"
            print(f"  {rank}. [{score:6.3f}] {chunk.doc_path} :: {trail}")
        print()


if __name__ == "__main__":
    main()
