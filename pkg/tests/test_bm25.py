from __future__ import annotations

import random

import pytest

from fusionqa.bm25 import (
    Bm25Index,
    Chunk,
    build_index,
    chunk_docs,
    load_index,
    save_index,
    search,
)
from oracle_bm25 import brute_force_rank, brute_force_scores

WORDS = (
    "storage blob container lifecycle policy delete retention account vm disk "
    "function timeout plan alert metric query cluster node pool agent pipeline "
    "domain tenant meeting organizer guest screen share quota limit price tier"
).split()


def _random_bodies(rng: random.Random, n_docs: int) -> dict[str, str]:
    bodies = {}
    for i in range(n_docs):
        length = rng.randint(5, 40)
        bodies[f"d{i:03d}"] = " ".join(rng.choice(WORDS) for _ in range(length))
    return bodies


def _chunks_from_bodies(bodies: dict[str, str]) -> list[Chunk]:
    return [
        Chunk(chunk_id=doc_id, doc_path="synthetic.md", heading_trail=(), body=body,
              token_count=max(len(body.split()), 1))
        for doc_id, body in bodies.items()
    ]


class TestChunkDocs:
    def test_small_doc_single_chunk(self):
        docs = [("a.md", " ".join(f"t{i}" for i in range(100)))]
        chunks = chunk_docs(docs, target_tokens=512, overlap_tokens=64)
        assert len(chunks) == 1
        assert chunks[0].token_count == 100

    def test_window_arithmetic(self):
        # 1000 homogeneous tokens, target 512, overlap 64: starts 0, 448, 896
        tokens = [f"t{i}" for i in range(1000)]
        docs = [("a.md", " ".join(tokens))]
        chunks = chunk_docs(docs, target_tokens=512, overlap_tokens=64)
        assert len(chunks) == 3
        starts = [chunk.body.split()[0] for chunk in chunks]
        assert starts == ["t0", "t448", "t896"]
        assert [chunk.token_count for chunk in chunks] == [512, 512, 104]

    def test_heading_trails(self):
        markdown = "# H1\nintro text here\n## H2\nnested body text\n"
        chunks = chunk_docs([("d.md", markdown)], 512, 64)
        assert [chunk.heading_trail for chunk in chunks] == [("H1",), ("H1", "H2")]

    def test_code_fence_never_split(self):
        fence = "```\n" + "\n".join(f"line {i}" for i in range(40)) + "\n```"
        markdown = "# H\n" + " ".join(f"w{i}" for i in range(30)) + "\n" + fence + "\nafter words"
        chunks = chunk_docs([("d.md", markdown)], target_tokens=60, overlap_tokens=10)
        with_fence = [c for c in chunks if "```" in c.body]
        assert with_fence
        for chunk in with_fence:
            assert chunk.body.count("```") == 2

    def test_oversized_block_emitted_whole(self):
        fence = "```\n" + " ".join(f"x{i}" for i in range(300)) + "\n```"
        chunks = chunk_docs([("d.md", fence)], target_tokens=100, overlap_tokens=10)
        assert any(chunk.token_count > 100 for chunk in chunks)

    def test_rejects_bad_window(self):
        with pytest.raises(ValueError):
            chunk_docs([("a.md", "x")], target_tokens=64, overlap_tokens=64)

    def test_chunk_ids_unique(self):
        docs = [("a.md", " ".join(WORDS * 40)), ("b.md", " ".join(WORDS * 40))]
        chunks = chunk_docs(docs, 128, 16)
        ids = [chunk.chunk_id for chunk in chunks]
        assert len(ids) == len(set(ids))


class TestBuildIndex:
    def test_hand_countable(self):
        chunks = [
            Chunk("c1", "d.md", (), "a b", 2),
            Chunk("c2", "d.md", (), "a a", 2),
        ]
        index = build_index(chunks)
        assert sorted(index.postings["a"]) == [("c1", 1), ("c2", 2)]
        assert index.postings["b"] == [("c1", 1)]
        assert index.avg_doc_length == 2.0
        assert index.doc_count == 2

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            build_index([])

    def test_serialization_deterministic(self, tmp_path):
        chunks = _chunks_from_bodies(_random_bodies(random.Random(5), 12))
        index = build_index(chunks)
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        save_index(index, chunks, first)
        save_index(build_index(chunks), chunks, second)
        assert first.read_bytes() == second.read_bytes()

    def test_round_trip(self, tmp_path):
        chunks = _chunks_from_bodies(_random_bodies(random.Random(6), 8))
        index = build_index(chunks, k1=1.4, b=0.6)
        path = tmp_path / "index.json"
        save_index(index, chunks, path)
        loaded, chunk_map = load_index(path)
        assert loaded.k1 == 1.4 and loaded.b == 0.6
        assert loaded.doc_lengths == index.doc_lengths
        assert set(chunk_map) == {chunk.chunk_id for chunk in chunks}
        query = "storage lifecycle policy"
        assert search(loaded, query, 5) == search(index, query, 5)

    def test_counting_oracle_on_fixture(self):
        bodies = _random_bodies(random.Random(7), 20)
        chunks = _chunks_from_bodies(bodies)
        index = build_index(chunks)
        assert index.doc_count == 20
        total_tokens = sum(len(body.split()) for body in bodies.values())
        assert sum(index.doc_lengths.values()) == total_tokens

    def test_adding_document_keeps_other_tfs(self):
        bodies = _random_bodies(random.Random(8), 10)
        small = build_index(_chunks_from_bodies(bodies))
        bodies_plus = dict(bodies)
        bodies_plus["zz_new"] = "storage quota limit"
        big = build_index(_chunks_from_bodies(bodies_plus))
        for term, postings in small.postings.items():
            kept = [p for p in big.postings[term] if p[0] != "zz_new"]
            assert kept == postings


class TestSearch:
    def test_unindexed_query_terms(self):
        index = build_index([Chunk("c1", "d.md", (), "alpha beta", 2)])
        assert search(index, "nomatch elsewhere", 3) == []

    def test_empty_query(self):
        index = build_index([Chunk("c1", "d.md", (), "alpha beta", 2)])
        assert search(index, "!!!", 3) == []

    def test_single_chunk_match(self):
        index = build_index([Chunk("c1", "d.md", (), "alpha beta gamma", 3)])
        results = search(index, "beta", 3)
        assert results[0][0] == "c1"
        assert results[0][1] > 0

    def test_rejects_k_below_one(self):
        index = build_index([Chunk("c1", "d.md", (), "alpha", 1)])
        with pytest.raises(ValueError):
            search(index, "alpha", 0)

    @pytest.mark.parametrize("corpus_seed", [11, 22, 33, 44, 55])
    def test_matches_brute_force_oracle(self, corpus_seed):
        rng = random.Random(corpus_seed)
        bodies = _random_bodies(rng, rng.randint(10, 50))
        index = build_index(_chunks_from_bodies(bodies))
        for query_seed in range(10):
            query_rng = random.Random(1000 * corpus_seed + query_seed)
            query = " ".join(query_rng.choice(WORDS) for _ in range(query_rng.randint(1, 6)))
            expected = brute_force_rank(bodies, query, k=10)
            actual = search(index, query, 10)
            assert [doc for doc, _ in actual] == [doc for doc, _ in expected]
            for (_, got), (_, want) in zip(actual, expected):
                assert got == pytest.approx(want, abs=1e-9)

    def test_tie_order_ascending_chunk_id(self):
        chunks = [
            Chunk("b_chunk", "d.md", (), "same body text", 3),
            Chunk("a_chunk", "d.md", (), "same body text", 3),
            Chunk("c_chunk", "d.md", (), "other words entirely", 3),
        ]
        index = build_index(chunks)
        results = search(index, "same body", 3)
        assert [doc for doc, _ in results] == ["a_chunk", "b_chunk"]
        assert results[0][1] == results[1][1]

    def test_duplicate_query_term_never_lowers_score(self):
        bodies = _random_bodies(random.Random(9), 15)
        index = build_index(_chunks_from_bodies(bodies))
        for term in ("storage", "alert", "meeting"):
            single = dict(search(index, term, 15))
            doubled = dict(search(index, f"{term} {term}", 15))
            for doc_id, score in single.items():
                assert doubled[doc_id] >= score - 1e-12

    def test_idf_formula(self):
        bodies = {"d1": "alpha beta", "d2": "alpha gamma", "d3": "delta epsilon"}
        index = build_index(_chunks_from_bodies(bodies))
        scores = brute_force_scores(bodies, "alpha")
        results = dict(search(index, "alpha", 3))
        assert results == pytest.approx(scores, abs=1e-12)
