"""Score sample (response, golden) pairs with the full metric suite.

Run:  python demos/06_metrics.py
"""

from fusionqa import (
    HashSentenceProvider,
    OneHotTokenProvider,
    bertscore,
    bleu,
    cosine_sim,
    detect_no_answer,
    rouge_l,
    rouge_n,
)

GOLDEN = (
    "There is no extra fee for the classification step you mentioned. "
    "You only pay for the custom model that finally runs on your document."
)

CANDIDATES = {
    "verbatim": GOLDEN,
    "paraphrase": (
        "The classification step costs nothing extra; billing applies only to "
        "the custom model that processes your document."
    ),
    "refusal": (
        "I'm sorry, but I'm not sure what you mean by that. Could you please "
        "provide more information or clarify your question?"
    ),
}


def main() -> None:
    sentence_provider = HashSentenceProvider(dimension=64)
    token_provider = OneHotTokenProvider()

    header = f"{'candidate':12s} {'BLEU':>7s} {'R-1':>7s} {'R-2':>7s} {'R-L':>7s} {'cos':>7s} {'BS-F1':>7s}  no-answer"
    print(header)
    print("-" * len(header))
    for name, candidate in CANDIDATES.items():
        _, _, f1 = bertscore(candidate, GOLDEN, token_provider)
        print(
            f"{name:12s} "
            f"{bleu(candidate, GOLDEN):7.4f} "
            f"{rouge_n(candidate, GOLDEN, 1):7.4f} "
            f"{rouge_n(candidate, GOLDEN, 2):7.4f} "
            f"{rouge_l(candidate, GOLDEN):7.4f} "
            f"{cosine_sim(candidate, GOLDEN, sentence_provider):7.4f} "
            f"{f1:7.4f}  "
            f"{detect_no_answer(candidate)}"
        )


if __name__ == "__main__":
    main()
