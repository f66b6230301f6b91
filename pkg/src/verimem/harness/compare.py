"""Side-by-side comparison of two runs over the same claims.

Built for ablations: run the same dataset with a switch flipped (memory
on/off, decomposer on/off) and compare tool-call totals and Macro-F1.
"""

from __future__ import annotations

from typing import Any

from .runner import RunReport


class MismatchedDatasets(Exception):
    """The two reports do not cover the same claims in the same order."""


def tool_call_reduction(total_a: int, total_b: int) -> tuple[int, float]:
    """Absolute and percentage drop in tool calls from run A to run B."""
    delta = total_a - total_b
    pct = 100.0 * delta / total_a if total_a else 0.0
    return delta, pct


def ablation_compare(report_a: RunReport, report_b: RunReport) -> dict[str, Any]:
    """Compare two reports; A is the baseline (e.g. memory off)."""
    ids_a = [row.id for row in report_a.claims]
    ids_b = [row.id for row in report_b.claims]
    if ids_a != ids_b:
        raise MismatchedDatasets(
            "reports cover different claims or a different ordering"
        )
    calls_a = report_a.aggregate["tool_calls_issued"]
    calls_b = report_b.aggregate["tool_calls_issued"]
    delta, pct = tool_call_reduction(calls_a, calls_b)
    row = {
        "dataset": report_a.dataset,
        "tool_calls_a": calls_a,
        "tool_calls_b": calls_b,
        "delta": delta,
        "pct_reduction": pct,
        "macro_f1_a": report_a.aggregate["macro_f1"],
        "macro_f1_b": report_b.aggregate["macro_f1"],
        "config_a": report_a.config,
        "config_b": report_b.config,
    }
    return {"datasets": [row], "overall": row}


def format_comparison(comparison: dict[str, Any]) -> str:
    def fmt(value: Any) -> str:
        return f"{value:.4f}" if isinstance(value, float) else "-"

    lines = [
        f"{'dataset':<24} {'calls A':>8} {'calls B':>8} {'delta':>6} {'pct':>7} {'macroF1 A':>10} {'macroF1 B':>10}"
    ]
    for row in comparison["datasets"]:
        lines.append(
            f"{row['dataset']:<24} {row['tool_calls_a']:>8} {row['tool_calls_b']:>8} "
            f"{row['delta']:>6} {row['pct_reduction']:>6.1f}% "
            f"{fmt(row['macro_f1_a']):>10} {fmt(row['macro_f1_b']):>10}"
        )
    return "\n".join(lines)
