"""Sequential batch runner with memory reuse and crash-resumable reports.

Claims run in file order because the evidence memory only pays off when
later claims can recall what earlier ones retrieved. The store is
persisted after every claim; a restart with ``resume_report`` pointing at
the previous (partial) report skips completed claims and re-runs only the
failed or missing ones, yielding the same final report as an
uninterrupted run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, IO, Sequence

from ..decomposer import decompose, degenerate_decomposition
from ..executor import (
    DEFAULT_T_MAX,
    ExecutorParseError,
    MemoryPolicy,
    VerifyOutcome,
    verify,
)
from ..gateway import CallCounter, ToolGateway, gateway_from_config
from ..memory import DEFAULT_PER_KEY_CAP, MemoryStore
from ..models import (
    Answer,
    Claim,
    Trajectory,
    VeracityLabel,
    action_to_dict,
    entities_of,
    format_timestamp,
    utc_now_second,
)
from ..providers import Provider, ProviderError, provider_from_config
from .datasets import load_dataset
from .metrics import macro_f1


@dataclass
class RunConfig:
    dataset: str | Path
    scheme: str = "true_false"
    memory: str | MemoryPolicy = MemoryPolicy.ON
    memory_file: str | Path | None = None
    use_decomposer: bool = True
    t_max: int = DEFAULT_T_MAX
    seed: int | None = None
    per_key_cap: int = DEFAULT_PER_KEY_CAP
    provider: dict[str, Any] | str | Path | None = None
    gateway: dict[str, Any] | str | Path | None = None
    trace_out: str | Path | None = None
    report_out: str | Path | None = None
    resume_report: str | Path | None = None

    @property
    def policy(self) -> MemoryPolicy:
        if isinstance(self.memory, MemoryPolicy):
            return self.memory
        return MemoryPolicy.from_text(self.memory)


@dataclass
class ClaimResult:
    """One row of a run report."""

    id: str
    gold: str | None
    predicted: str | None = None
    forced: bool = False
    steps: int = 0
    tool_calls_issued: int = 0
    tool_calls_succeeded: int = 0
    per_tool_issued: dict[str, int] = field(default_factory=dict)
    per_tool_succeeded: dict[str, int] = field(default_factory=dict)
    memory_records: int = 0
    adjudicated: str | None = None  # reserved for external review workflows
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        if self.error is not None:
            return {"id": self.id, "gold": self.gold, "error": self.error,
                    "tool_calls_issued": self.tool_calls_issued,
                    "tool_calls_succeeded": self.tool_calls_succeeded,
                    "per_tool_issued": self.per_tool_issued,
                    "per_tool_succeeded": self.per_tool_succeeded}
        return {
            "id": self.id,
            "gold": self.gold,
            "predicted": self.predicted,
            "forced": self.forced,
            "steps": self.steps,
            "tool_calls_issued": self.tool_calls_issued,
            "tool_calls_succeeded": self.tool_calls_succeeded,
            "per_tool_issued": self.per_tool_issued,
            "per_tool_succeeded": self.per_tool_succeeded,
            "memory_records": self.memory_records,
            "adjudicated": self.adjudicated,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ClaimResult":
        return cls(
            id=data["id"],
            gold=data.get("gold"),
            predicted=data.get("predicted"),
            forced=data.get("forced", False),
            steps=data.get("steps", 0),
            tool_calls_issued=data.get("tool_calls_issued", 0),
            tool_calls_succeeded=data.get("tool_calls_succeeded", 0),
            per_tool_issued=dict(data.get("per_tool_issued", {})),
            per_tool_succeeded=dict(data.get("per_tool_succeeded", {})),
            memory_records=data.get("memory_records", 0),
            adjudicated=data.get("adjudicated"),
            error=data.get("error"),
        )


@dataclass
class RunReport:
    dataset: str
    scheme: str
    config: dict[str, Any]
    claims: list[ClaimResult]
    aggregate: dict[str, Any]
    generated_at: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "dataset": self.dataset,
            "scheme": self.scheme,
            "config": self.config,
            "claims": [row.to_dict() for row in self.claims],
            "aggregate": self.aggregate,
            "generated_at": self.generated_at,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunReport":
        return cls(
            dataset=data["dataset"],
            scheme=data.get("scheme", "true_false"),
            config=data.get("config", {}),
            claims=[ClaimResult.from_dict(row) for row in data.get("claims", ())],
            aggregate=data.get("aggregate", {}),
            generated_at=data.get("generated_at", ""),
        )

    @classmethod
    def load(cls, path: str | Path) -> "RunReport":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def write_trace(handle: IO[str], trajectory: Trajectory) -> None:
    """Append one trajectory to a JSONL trace: one record per step plus a
    terminal verdict record."""
    total = len(trajectory.steps)
    for index, step in enumerate(trajectory.steps, start=1):
        forced_step = (
            trajectory.forced and index == total and isinstance(step.action, Answer)
        )
        handle.write(
            json.dumps(
                {
                    "claim_id": trajectory.claim_id,
                    "t": index,
                    "thought": step.thought,
                    "action": action_to_dict(step.action),
                    "observation": step.observation,
                    "forced": forced_step,
                },
                ensure_ascii=False,
            )
            + "\n"
        )
    verdict = trajectory.verdict
    handle.write(
        json.dumps(
            {
                "claim_id": trajectory.claim_id,
                "verdict": verdict.label.value if verdict else None,
                "forced": trajectory.forced,
                "rationale": verdict.rationale if verdict else None,
            },
            ensure_ascii=False,
        )
        + "\n"
    )


def process_claim(
    claim: Claim,
    provider: Provider,
    gateway: ToolGateway | None,
    store: MemoryStore | None,
    policy: MemoryPolicy,
    t_max: int,
    use_decomposer: bool,
    clock: Callable[[], datetime] = utc_now_second,
) -> tuple[ClaimResult, VerifyOutcome]:
    """Decompose, verify, and commit memory for a single claim.

    Raises ProviderError/ExecutorParseError; callers decide whether that
    fails the claim or the whole run.
    """
    if use_decomposer:
        decomposition = decompose(claim, provider)
    else:
        decomposition = degenerate_decomposition(claim)
    counter = CallCounter()
    outcome = verify(
        claim, decomposition, store, gateway, provider,
        policy=policy, t_max=t_max, counter=counter, clock=clock,
    )
    if policy in (MemoryPolicy.ON, MemoryPolicy.FIRST) and store is not None:
        store.update(entities_of(decomposition), outcome.delta)
    row = ClaimResult(
        id=claim.id,
        gold=claim.gold_label.value if claim.gold_label else None,
        predicted=outcome.verdict.label.value,
        forced=outcome.trajectory.forced,
        steps=len(outcome.trajectory.steps),
        tool_calls_issued=counter.issued_total,
        tool_calls_succeeded=counter.succeeded_total,
        per_tool_issued=dict(sorted(counter.issued.items())),
        per_tool_succeeded=dict(sorted(counter.succeeded.items())),
        memory_records=len(outcome.recalled),
    )
    return row, outcome


def _aggregate(rows: Sequence[ClaimResult]) -> dict[str, Any]:
    pairs = [
        (row.gold, row.predicted)
        for row in rows
        if row.error is None and row.gold is not None and row.predicted is not None
    ]
    label_pairs = [
        (VeracityLabel.from_text(gold), VeracityLabel.from_text(pred))
        for gold, pred in pairs
    ]
    scores = macro_f1(label_pairs) if label_pairs else None
    per_tool_issued: dict[str, int] = {}
    per_tool_succeeded: dict[str, int] = {}
    for row in rows:
        for tool, count in row.per_tool_issued.items():
            per_tool_issued[tool] = per_tool_issued.get(tool, 0) + count
        for tool, count in row.per_tool_succeeded.items():
            per_tool_succeeded[tool] = per_tool_succeeded.get(tool, 0) + count
    return {
        "evaluated": sum(1 for row in rows if row.error is None),
        "errored": sum(1 for row in rows if row.error is not None),
        "f1_true": scores.f1_true if scores else None,
        "f1_false": scores.f1_false if scores else None,
        "macro_f1": scores.macro if scores else None,
        "tool_calls_issued": sum(row.tool_calls_issued for row in rows),
        "tool_calls_succeeded": sum(row.tool_calls_succeeded for row in rows),
        "per_tool_issued": dict(sorted(per_tool_issued.items())),
        "per_tool_succeeded": dict(sorted(per_tool_succeeded.items())),
        "memory_hits": sum(
            1 for row in rows if row.error is None and row.memory_records > 0
        ),
        "forced": sum(1 for row in rows if row.error is None and row.forced),
    }


def run_batch(
    config: RunConfig,
    provider: Provider | None = None,
    gateway: ToolGateway | None = None,
    clock: Callable[[], datetime] = utc_now_second,
) -> RunReport:
    """Run every claim of a dataset through the pipeline, in file order."""
    policy = config.policy
    records = load_dataset(config.dataset, config.scheme)
    dataset_name = Path(config.dataset).name

    if policy is MemoryPolicy.OFF:
        store = None
    elif config.memory_file and Path(config.memory_file).exists():
        store = MemoryStore.load(config.memory_file, per_key_cap=config.per_key_cap)
    else:
        store = MemoryStore(
            per_key_cap=config.per_key_cap, backing_path=config.memory_file
        )

    if provider is None:
        if config.provider is None:
            raise ValueError("run config names no provider")
        provider = provider_from_config(config.provider)

    own_gateway = False
    if gateway is None and policy is not MemoryPolicy.ONLY:
        gateway = gateway_from_config(config.gateway)
        own_gateway = True
    if policy is MemoryPolicy.ONLY:
        gateway = None  # the toolset is disconnected for the whole run

    done: dict[str, ClaimResult] = {}
    if config.resume_report and Path(config.resume_report).exists():
        prior = RunReport.load(config.resume_report)
        done = {row.id: row for row in prior.claims if row.error is None}

    trace_handle: IO[str] | None = None
    if config.trace_out:
        trace_handle = open(config.trace_out, "w", encoding="utf-8")

    rows: list[ClaimResult] = []
    try:
        for record in records:
            if record.id in done:
                rows.append(done[record.id])
                continue
            claim = record.to_claim(dataset_name)
            try:
                row, outcome = process_claim(
                    claim, provider, gateway, store, policy,
                    config.t_max, config.use_decomposer, clock,
                )
            except (ProviderError, ExecutorParseError) as exc:
                rows.append(
                    ClaimResult(
                        id=claim.id,
                        gold=claim.gold_label.value if claim.gold_label else None,
                        error=f"{type(exc).__name__}: {exc}",
                    )
                )
                continue
            if (
                policy in (MemoryPolicy.ON, MemoryPolicy.FIRST)
                and store is not None
                and config.memory_file
            ):
                store.persist()
            rows.append(row)
            if trace_handle:
                write_trace(trace_handle, outcome.trajectory)
    finally:
        if trace_handle:
            trace_handle.close()
        if own_gateway and gateway is not None:
            gateway.close()

    report = RunReport(
        dataset=dataset_name,
        scheme=config.scheme,
        config={
            "memory": policy.value,
            "use_decomposer": config.use_decomposer,
            "t_max": config.t_max,
            "seed": config.seed,
            "per_key_cap": config.per_key_cap,
        },
        claims=rows,
        aggregate=_aggregate(rows),
        generated_at=format_timestamp(clock()),
    )
    if config.report_out:
        report.save(config.report_out)
    return report


def format_report(report: RunReport) -> str:
    """Plain-text summary table for terminal output."""
    agg = report.aggregate
    lines = [
        f"dataset: {report.dataset} (scheme={report.scheme})",
        f"memory={report.config.get('memory')} decomposer={report.config.get('use_decomposer')} t_max={report.config.get('t_max')}",
        "",
        f"{'claims':>10}  {'errored':>7}  {'f1_true':>8}  {'f1_false':>8}  {'macro_f1':>8}  {'tool calls':>10}",
    ]

    def fmt(value: Any) -> str:
        return f"{value:.4f}" if isinstance(value, float) else "-"

    lines.append(
        f"{agg['evaluated']:>10}  {agg['errored']:>7}  {fmt(agg['f1_true']):>8}  "
        f"{fmt(agg['f1_false']):>8}  {fmt(agg['macro_f1']):>8}  {agg['tool_calls_issued']:>10}"
    )
    if agg["per_tool_issued"]:
        lines.append("")
        lines.append("per-tool calls (issued / succeeded):")
        for tool, count in agg["per_tool_issued"].items():
            lines.append(
                f"  {tool:<28} {count:>5} / {agg['per_tool_succeeded'].get(tool, 0)}"
            )
    lines.append("")
    lines.append(f"memory hits: {agg['memory_hits']}   forced verdicts: {agg['forced']}")
    return "\n".join(lines)
