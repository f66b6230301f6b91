"""Evaluation harness: datasets, metrics, batch running, ablation compare."""

from .compare import MismatchedDatasets, ablation_compare, format_comparison, tool_call_reduction
from .datasets import DatasetRecord, SchemaError, SCHEMES, load_dataset, stratified_sample, write_dataset
from .metrics import EmptyInputError, F1Scores, macro_f1
from .runner import ClaimResult, RunConfig, RunReport, format_report, process_claim, run_batch, write_trace

__all__ = [
    "ClaimResult",
    "DatasetRecord",
    "EmptyInputError",
    "F1Scores",
    "MismatchedDatasets",
    "RunConfig",
    "RunReport",
    "SCHEMES",
    "SchemaError",
    "ablation_compare",
    "format_comparison",
    "format_report",
    "load_dataset",
    "macro_f1",
    "process_claim",
    "run_batch",
    "stratified_sample",
    "tool_call_reduction",
    "write_dataset",
    "write_trace",
]
