#!/usr/bin/env python
"""Regenerate the bundled toy corpus and the canned dry-run responses.

The toy corpus feeds the end-to-end dry run; the canned table gives the mock
backends deterministic, content-controlled responses per question and arm.
Run from the repo root after editing the records below:

    python tools/gen_toy_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from fusionqa.dataset import QARecord, parse_timestamp, split  # noqa: E402
from fusionqa.mock import REPHRASE_SUFFIX, question_fingerprint  # noqa: E402

DATA_DIR = ROOT / "src" / "fusionqa" / "data"

REFUSAL = (
    "I'm sorry, but I'm not sure what you mean by that. Could you please "
    "provide more information or clarify your question?"
)

RECORDS = [
    {
        "id": "q001",
        "question": (
            "I have set the auto shutdown time for my VM to 00:30 local time and later "
            "moved it to 01:00 at 00:14 the same night. The change only took effect the "
            "next day. Is this expected?"
        ),
        "answer": (
            "Yes, this is the expected behavior. If you update the auto shutdown schedule "
            "within 30 minutes of the previously scheduled time, the new shutdown time "
            "takes effect the next day."
        ),
        "tags": ["Azure Virtual Machines"],
        "question_upvotes": 1,
        "answer_upvotes": 2,
        "posted_at": "2022-01-14T08:12:00Z",
    },
    {
        "id": "q002",
        "question": (
            "My consumption plan function app stops mid-execution after a few minutes. "
            "What is the default timeout for functions on the consumption plan, and can "
            "I raise it?"
        ),
        "answer": (
            "The default timeout on the consumption plan is 5 minutes and you can raise "
            "it to at most 10 minutes by setting functionTimeout in host.json. For longer "
            "workloads move to a premium or dedicated plan."
        ),
        "tags": ["Azure Functions"],
        "question_upvotes": 0,
        "answer_upvotes": 1,
        "posted_at": "2022-02-03T16:40:00Z",
    },
    {
        "id": "q003",
        "question": (
            "A composed model is created from a collection of custom models. When a "
            "document is submitted, the service runs a classification step first. What "
            "is the price for the classification step?"
        ),
        "answer": (
            "There is no extra fee for the classification step you mentioned. You only "
            "pay for the custom model that finally runs on your document."
        ),
        "tags": ["Azure AI Document Intelligence"],
        "question_upvotes": 2,
        "answer_upvotes": 3,
        "posted_at": "2022-02-21T11:05:00Z",
    },
    {
        "id": "q004",
        "question": (
            "Is it possible to have a custom domain name in tenant A that has the same "
            "name as the main domain of tenant B, working as an alias across tenants?"
        ),
        "answer": (
            "A domain name can only be verified in one directory at a time. If the name "
            "is already verified in another tenant it cannot be verified again in a new "
            "one, so such an alias is not possible."
        ),
        "tags": ["Azure Active Directory"],
        "question_upvotes": 0,
        "answer_upvotes": 1,
        "posted_at": "2022-03-09T19:55:00Z",
    },
    {
        "id": "q005",
        "question": (
            "Can we change the organizer of a Teams meeting while the meeting is already "
            "running, for example to hand the meeting over to a colleague?"
        ),
        "answer": (
            "The organizer of a meeting cannot be changed after the meeting is created. "
            "You can add co-organizers instead, which grants most of the same controls."
        ),
        "tags": ["Microsoft Teams"],
        "question_upvotes": 1,
        "answer_upvotes": 0,
        "posted_at": "2022-04-17T07:30:00Z",
    },
    {
        "id": "q006",
        "question": (
            "Our blob storage bill keeps growing because of old diagnostic logs. Can the "
            "storage account delete blobs older than ninety days automatically?"
        ),
        "answer": (
            "Yes, use a lifecycle management policy on the storage account. A rule with "
            "a delete action after 90 days since modification removes the old blobs "
            "automatically and at no extra charge."
        ),
        "tags": ["Azure Storage"],
        "question_upvotes": 0,
        "answer_upvotes": 2,
        "posted_at": "2022-05-26T13:21:00Z",
    },
    {
        "id": "q007",
        "question": (
            "After scaling our AKS cluster we see pods stuck in pending with a node "
            "affinity message. The new node pool uses a different VM size. What should "
            "we check first?"
        ),
        "answer": (
            "Check the node selectors and taints on the new pool first. Pods carrying a "
            "nodeSelector for the old pool label will not schedule on the new pool until "
            "the selector or the pool labels are updated."
        ),
        "tags": ["Azure Kubernetes Service"],
        "question_upvotes": 3,
        "answer_upvotes": 1,
        "posted_at": "2022-06-30T21:48:00Z",
    },
    {
        "id": "q008",
        "question": (
            "Our pipeline fails with an error saying the agent pool does not have any "
            "online agents. The self-hosted agent shows as offline right after a reboot "
            "of the build machine. How do we bring it back?"
        ),
        "answer": (
            "Restart the agent service on the build machine and confirm it can reach the "
            "service URL. If the agent was configured interactively, reconfigure it to "
            "run as a service so it survives reboots."
        ),
        "tags": ["Azure DevOps"],
        "question_upvotes": 1,
        "answer_upvotes": 1,
        "posted_at": "2022-08-08T10:02:00Z",
    },
    {
        "id": "q009",
        "question": (
            "We need an alert when average CPU of a VM stays above 85 percent for ten "
            "minutes. Should we use a metric alert or a log query alert for this?"
        ),
        "answer": (
            "Use a metric alert. Metric alerts evaluate platform metrics like CPU "
            "directly with a configurable window and are cheaper and faster than log "
            "query alerts for this case."
        ),
        "tags": ["Azure Monitor"],
        "question_upvotes": 0,
        "answer_upvotes": 0,
        "posted_at": "2022-09-12T15:36:00Z",
    },
    {
        "id": "q010",
        "question": (
            "Uploading a 400 MB file to our function app fails with a 413 error. Is "
            "there a request size limit, and what is the recommended way to accept "
            "large uploads?"
        ),
        "answer": (
            "HTTP triggered functions limit the request body to 100 MB. For larger "
            "files have clients upload directly to blob storage with a SAS token and "
            "notify the function afterwards."
        ),
        "tags": ["Azure Functions", "Azure Storage"],
        "question_upvotes": 2,
        "answer_upvotes": 2,
        "posted_at": "2022-10-19T09:58:00Z",
    },
    {
        "id": "q011",
        "question": (
            "When guests join our Teams meetings they cannot share their screen. "
            "Organizer settings look right. Which policy controls screen sharing for "
            "guest users?"
        ),
        "answer": (
            "Screen sharing for guests is controlled by the meeting policy assigned to "
            "the organizer, specifically the content sharing section. Set screen sharing "
            "mode to entire screen for the organizer's policy and guests inherit it."
        ),
        "tags": ["Microsoft Teams"],
        "question_upvotes": 1,
        "answer_upvotes": 3,
        "posted_at": "2022-11-23T18:16:00Z",
    },
    {
        "id": "q012",
        "question": (
            "Our VM disk shows 500 IOPS even though the size tier advertises more. The "
            "disk is a P10 attached to a B2s machine. Why is the throughput capped?"
        ),
        "answer": (
            "The virtual machine size caps disk throughput before the disk limit "
            "applies. A B2s machine allows fewer IOPS than a P10 disk can deliver, so "
            "the VM limit wins; move to a larger VM size to see the full disk speed."
        ),
        "tags": ["Azure Virtual Machines", "Azure Storage"],
        "question_upvotes": 0,
        "answer_upvotes": 1,
        "posted_at": "2022-12-29T22:44:00Z",
    },
]


def first_sentence(text: str) -> str:
    head, dot, _ = text.partition(". ")
    return head + ("." if dot else "")


def lower_first(text: str) -> str:
    return text[0].lower() + text[1:] if text else text


def build_mock_table(records: list[dict], test_ids: list[str]) -> dict:
    refusal_llm_only = set(test_ids[:2])
    refusal_bm25 = set(test_ids[:1])
    responses: dict[str, dict[str, str]] = {}
    opinions: dict[str, str] = {}
    for index, record in enumerate(records):
        fingerprint = question_fingerprint(record["question"])
        answer = record["answer"]
        head = first_sentence(answer)
        opinions[fingerprint] = (
            f"In short: {head} Confirm the exact limits on the product documentation page."
        )
        arms = {}
        if record["id"] in refusal_llm_only:
            arms["LLM_ONLY"] = REFUSAL
        else:
            arms["LLM_ONLY"] = f"Generally, {lower_first(head)} That matches the documented behavior."
        if record["id"] in refusal_bm25:
            arms["LLM_BM25"] = REFUSAL
        else:
            arms["LLM_BM25"] = f"Based on the documentation, {lower_first(answer)}"
        arms["LLM_EXPERT"] = answer if index % 2 == 0 else f"As the expert notes, {lower_first(answer)}"
        if index % 3 == 0:
            arms["LLM_BM25_EXPERT"] = answer + " See the linked documentation page for more detail."
        else:
            arms["LLM_BM25_EXPERT"] = answer
        responses[fingerprint] = arms
    return {"responses": responses, "opinions": opinions}


def check_no_length_ties(records: list[dict], table: dict) -> None:
    # The mock judge prefers the longer text; equal lengths would make the
    # verdict depend on A/B position. Keep the fixtures tie-free.
    for record in records:
        fingerprint = question_fingerprint(record["question"])
        rephrased_len = len(record["answer"] + REPHRASE_SUFFIX)
        candidates = list(table["responses"][fingerprint].values())
        candidates.append(table["opinions"][fingerprint])
        for text in candidates:
            if len(text) == rephrased_len:
                raise SystemExit(
                    f"{record['id']}: canned response length ties the rephrased golden; "
                    "adjust the wording"
                )


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    corpus_path = DATA_DIR / "toy_corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as f:
        for record in RECORDS:
            f.write(json.dumps({**record, "flags": []}, ensure_ascii=False, sort_keys=True))
            f.write("\n")

    qa_records = [
        QARecord(
            id=r["id"],
            question=r["question"],
            answer=r["answer"],
            tags=tuple(r["tags"]),
            question_upvotes=r["question_upvotes"],
            answer_upvotes=r["answer_upvotes"],
            posted_at=parse_timestamp(r["posted_at"]),
        )
        for r in RECORDS
    ]
    result = split(qa_records, ratio=0.5, seed=7)
    test_ids = sorted(result.test)
    table = build_mock_table(RECORDS, test_ids)
    check_no_length_ties(RECORDS, table)

    mock_path = DATA_DIR / "mock_responses.json"
    with open(mock_path, "w", encoding="utf-8") as f:
        json.dump(table, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")

    print(f"wrote {corpus_path} ({len(RECORDS)} records)")
    print(f"wrote {mock_path} (test split: {', '.join(test_ids)})")


if __name__ == "__main__":
    main()
