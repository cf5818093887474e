"""Rendering of metric reports as markdown and CSV tables.

Layout mirrors the evaluation tables: one metric per row, one strategy per
column. The best value per row is bolded in markdown (the maximum, except
for NAR where lower is better). NAR and LLM Eval render as percentages.
"""

from __future__ import annotations

import csv
import io

from .fusion import STRATEGY_ORDER, StrategyKind
from .metrics import MetricReport

ROW_LABELS = (
    ("bleu", "BLEU"),
    ("rouge1", "ROUGE-1"),
    ("rouge2", "ROUGE-2"),
    ("rougeL", "ROUGE-L"),
    ("cosine_sim", "Cosine Sim."),
    ("bertscore_p", "BERTScore-P"),
    ("bertscore_r", "BERTScore-R"),
    ("bertscore_f1", "BERTScore-F1"),
    ("nar", "NAR"),
    ("llm_eval", "LLM Eval."),
)

PERCENT_METRICS = {"nar", "llm_eval"}
# NAR measures failures, so its best value is the row minimum.
LOWER_IS_BETTER = {"nar"}


def _format_value(metric: str, value: float) -> str:
    if metric in PERCENT_METRICS:
        return f"{value * 100:.2f}%"
    return f"{value:.4f}"


def _ordered_strategies(reports: dict[StrategyKind, MetricReport]) -> list[StrategyKind]:
    return [strategy for strategy in STRATEGY_ORDER if strategy in reports]


def _row_values(
    metric: str, strategies: list[StrategyKind], reports: dict[StrategyKind, MetricReport]
) -> dict[StrategyKind, float | None]:
    values: dict[StrategyKind, float | None] = {}
    for strategy in strategies:
        values[strategy] = reports[strategy].aggregate.get(metric)
    return values


def _best_strategies(metric: str, values: dict[StrategyKind, float | None]) -> set[StrategyKind]:
    present = {s: v for s, v in values.items() if v is not None}
    if not present:
        return set()
    pick = min(present.values()) if metric in LOWER_IS_BETTER else max(present.values())
    return {s for s, v in present.items() if v == pick}


def render_markdown(reports: dict[StrategyKind, MetricReport]) -> str:
    strategies = _ordered_strategies(reports)
    lines = []
    header = ["Metric"] + [s.column_label for s in strategies]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "|".join("---" for _ in header) + "|")
    for metric, label in ROW_LABELS:
        values = _row_values(metric, strategies, reports)
        best = _best_strategies(metric, values)
        cells = [label]
        for strategy in strategies:
            value = values[strategy]
            if value is None:
                cells.append("skipped")
            else:
                text = _format_value(metric, value)
                cells.append(f"**{text}**" if strategy in best else text)
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def render_csv(reports: dict[StrategyKind, MetricReport]) -> str:
    strategies = _ordered_strategies(reports)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["metric"] + [s.column_label for s in strategies] + ["best"])
    for metric, label in ROW_LABELS:
        values = _row_values(metric, strategies, reports)
        best = _best_strategies(metric, values)
        row = [label]
        for strategy in strategies:
            value = values[strategy]
            row.append("skipped" if value is None else _format_value(metric, value))
        row.append(";".join(sorted(s.column_label for s in best)))
        writer.writerow(row)
    return buffer.getvalue()
