"""Walk through the corpus cleaning pipeline on a deliberately dirty sample.

Run:  python demos/01_clean_corpus.py
"""

from datetime import datetime, timezone

from fusionqa import QARecord, run_pipeline

DIRTY = [
    QARecord(
        id="post-1",
        question="VM keeps stopping, thanks bob@1234567 for looking.\n\n\nAny ideas?",
        answer=(
            "Check the auto shutdown schedule at https://learn.example/vm-shutdown\n"
            "****\n"
            "Yes.\n--please don't forget to upvote and Accept as answer if the reply is helpful--"
        ),
        tags=("Azure Virtual Machines",),
        posted_at=datetime(2022, 3, 1, tzinfo=timezone.utc),
    ),
    QARecord(
        id="post-2",
        question="Error shown here ![screenshot](https://img.example/err.png), what now?",
        answer="Please retry after clearing the cache.",
        tags=("Azure Functions",),
        posted_at=datetime(2022, 3, 2, tzinfo=timezone.utc),
    ),
    QARecord(
        id="post-3",
        question="How do I keep code blocks intact?",
        answer="Like this:\n```\nline one\n\n\nline three   spaced\n```\nDone.",
        tags=("Azure DevOps",),
        posted_at=datetime(2022, 3, 3, tzinfo=timezone.utc),
    ),
]


def main() -> None:
    cleaned, report = run_pipeline(DIRTY)

    print("=== before ===")
    print(DIRTY[0].answer)
    print("\n=== after ===")
    print(cleaned[0].answer)

    print("\nper-rule hits:")
    for rule, hits in report.per_rule_hits.items():
        print(f"  {rule:20s} {hits}")
    print(f"dropped (screenshot questions): {report.dropped_ids}")

    print("\ncode fences survive untouched:")
    survivor = next(record for record in cleaned if record.id == "post-3")
    print(survivor.answer)


if __name__ == "__main__":
    main()
