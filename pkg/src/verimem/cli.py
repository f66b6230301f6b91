"""Command-line interface.

Every data command is a thin client over the same service layer the HTTP
endpoints use. By default the engine runs in-process; pass ``--server``
to talk to a running service instead (the shared memory then lives
there). ``verimem serve`` starts that service.

Exit codes: 0 clean run, 1 configuration error, 2 unrecoverable IO.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any

import click
import httpx

from .executor import ExecutorParseError, MemoryPolicy
from .harness import (
    MismatchedDatasets,
    RunConfig,
    RunReport,
    SchemaError,
    ablation_compare,
    format_comparison,
    format_report,
    load_dataset,
    run_batch,
    stratified_sample,
    write_dataset,
)
from .memory import FormatError
from .models import Claim
from .providers import ProviderError
from .service.state import EngineState, parse_gold

MEMORY_CHOICES = click.Choice([policy.value for policy in MemoryPolicy])


class RemoteError(Exception):
    """A --server request failed."""


def _post(server: str, path: str, payload: dict[str, Any]) -> dict[str, Any]:
    response = httpx.post(server.rstrip("/") + path, json=payload, timeout=600.0)
    if response.status_code >= 400:
        raise RemoteError(f"{path} -> {response.status_code}: {response.text[:300]}")
    return response.json()


def _get(server: str, path: str) -> dict[str, Any]:
    response = httpx.get(server.rstrip("/") + path, timeout=60.0)
    if response.status_code >= 400:
        raise RemoteError(f"{path} -> {response.status_code}: {response.text[:300]}")
    return response.json()


def _engine(
    provider_config: str,
    gateway_config: str | None,
    memory_file: str | None,
    memory: str,
    max_steps: int,
) -> EngineState:
    if not provider_config:
        raise click.UsageError("--provider-config is required without --server")
    return EngineState.from_config(
        provider_config,
        gateway_config,
        memory_file=memory_file,
        default_policy=MemoryPolicy.from_text(memory),
        default_t_max=max_steps,
    )


@click.group()
def cli() -> None:
    """Claim verification with tool-assisted retrieval and evidence memory."""


@cli.command()
@click.argument("text")
@click.option("--id", "claim_id", default="adhoc-1", show_default=True)
@click.option("--gold", default=None, help="Optional gold label (true/false/supported/refuted).")
@click.option("--dataset-tag", default="", help="Dataset identifier recorded on the claim.")
@click.option("--memory", type=MEMORY_CHOICES, default="on", show_default=True)
@click.option("--memory-file", type=click.Path(), default=None)
@click.option("--max-steps", type=int, default=5, show_default=True)
@click.option("--no-decomposer", is_flag=True, help="Feed the raw claim straight to the loop.")
@click.option("--provider-config", type=click.Path(exists=True), default=None)
@click.option("--gateway-config", type=click.Path(exists=True), default=None)
@click.option("--trace-out", type=click.Path(), default=None)
@click.option("--server", default=None, help="Base URL of a running service.")
def verify(
    text: str,
    claim_id: str,
    gold: str | None,
    dataset_tag: str,
    memory: str,
    memory_file: str | None,
    max_steps: int,
    no_decomposer: bool,
    provider_config: str | None,
    gateway_config: str | None,
    trace_out: str | None,
    server: str | None,
) -> None:
    """Verify a single claim and print the verdict with its trajectory."""
    payload = {
        "claim": {
            "id": claim_id,
            "text": text,
            "gold_label": gold,
            "dataset": dataset_tag,
        },
        "options": {
            "memory": memory,
            "max_steps": max_steps,
            "use_decomposer": not no_decomposer,
        },
    }
    if server:
        result = _post(server, "/verify", payload)
    else:
        engine = _engine(provider_config, gateway_config, memory_file, memory, max_steps)
        try:
            claim = Claim(
                id=claim_id,
                text=text,
                gold_label=parse_gold(gold),
                dataset=dataset_tag,
            )
            result = engine.verify_claim(
                claim,
                policy=MemoryPolicy.from_text(memory),
                t_max=max_steps,
                use_decomposer=not no_decomposer,
            )
        finally:
            engine.close()
        if trace_out:
            from .harness.runner import write_trace
            from .models import Trajectory

            with open(trace_out, "w", encoding="utf-8") as handle:
                write_trace(
                    handle,
                    Trajectory.from_dict(
                        {
                            "claim_id": result["claim_id"],
                            "steps": result["steps"],
                            "verdict": {
                                "label": result["label"],
                                "rationale": result["rationale"],
                                "trajectory_ref": result["claim_id"],
                            },
                            "forced": result["forced"],
                        }
                    ),
                )
    click.echo(json.dumps(result, ensure_ascii=False, indent=2))


@cli.command()
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--scheme", type=click.Choice(["true_false", "supported_refuted"]), default="true_false", show_default=True)
@click.option("--memory", type=MEMORY_CHOICES, default="on", show_default=True)
@click.option("--memory-file", type=click.Path(), default=None)
@click.option("--no-decomposer", is_flag=True)
@click.option("--max-steps", type=int, default=5, show_default=True)
@click.option("--provider-config", type=click.Path(exists=True), default=None)
@click.option("--gateway-config", type=click.Path(exists=True), default=None)
@click.option("--trace-out", type=click.Path(), default=None)
@click.option("--report-out", type=click.Path(), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--resume", "resume_report", type=click.Path(), default=None,
              help="Prior partial report; completed claims are skipped.")
@click.option("--server", default=None, help="Base URL of a running service.")
def run(
    dataset: str,
    scheme: str,
    memory: str,
    memory_file: str | None,
    no_decomposer: bool,
    max_steps: int,
    provider_config: str | None,
    gateway_config: str | None,
    trace_out: str | None,
    report_out: str | None,
    seed: int | None,
    resume_report: str | None,
    server: str | None,
) -> None:
    """Run a whole dataset through the pipeline and print the summary."""
    if server:
        result = _post(
            server,
            "/runs",
            {
                "dataset": dataset,
                "scheme": scheme,
                "memory": memory,
                "memory_file": memory_file,
                "use_decomposer": not no_decomposer,
                "max_steps": max_steps,
                "seed": seed,
                "trace_out": trace_out,
                "report_out": report_out,
                "resume_report": resume_report,
            },
        )
        click.echo(result["summary"])
        return
    if not provider_config:
        raise click.UsageError("--provider-config is required without --server")
    config = RunConfig(
        dataset=dataset,
        scheme=scheme,
        memory=memory,
        memory_file=memory_file,
        use_decomposer=not no_decomposer,
        t_max=max_steps,
        seed=seed,
        provider=provider_config,
        gateway=gateway_config,
        trace_out=trace_out,
        report_out=report_out,
        resume_report=resume_report,
    )
    report = run_batch(config)
    click.echo(format_report(report))
    if report_out:
        click.echo(f"report written to {report_out}")


@cli.command()
@click.argument("report_a", type=click.Path(exists=True))
@click.argument("report_b", type=click.Path(exists=True))
@click.option("--report-out", type=click.Path(), default=None)
@click.option("--server", default=None, help="Base URL of a running service.")
def compare(report_a: str, report_b: str, report_out: str | None, server: str | None) -> None:
    """Compare two run reports (A = baseline): tool calls and Macro-F1."""
    if server:
        result = _post(
            server,
            "/compare",
            {
                "report_a": json.loads(Path(report_a).read_text(encoding="utf-8")),
                "report_b": json.loads(Path(report_b).read_text(encoding="utf-8")),
            },
        )
        comparison, summary = result["comparison"], result["summary"]
    else:
        comparison = ablation_compare(RunReport.load(report_a), RunReport.load(report_b))
        summary = format_comparison(comparison)
    click.echo(summary)
    if report_out:
        Path(report_out).write_text(
            json.dumps(comparison, ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )


@cli.command()
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--scheme", type=click.Choice(["true_false", "supported_refuted"]), default="true_false", show_default=True)
@click.option("--size", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--server", default=None, help="Base URL of a running service.")
def sample(dataset: str, scheme: str, size: int, seed: int, out: str, server: str | None) -> None:
    """Stratified-sample a dataset into a balanced fixture, reproducibly."""
    if server:
        _post(
            server,
            "/sample",
            {"dataset": dataset, "scheme": scheme, "size": size, "seed": seed, "out": out},
        )
    else:
        records = load_dataset(dataset, scheme)
        write_dataset(stratified_sample(records, size, seed), out)
    click.echo(f"wrote {size} records to {out}")


@cli.command()
@click.option("--gateway-config", type=click.Path(exists=True), default=None)
@click.option("--server", default=None, help="Base URL of a running service.")
def tools(gateway_config: str | None, server: str | None) -> None:
    """List the connected tool catalog."""
    if server:
        specs = _get(server, "/tools")["tools"]
    else:
        from .gateway import gateway_from_config

        gateway = gateway_from_config(gateway_config)
        try:
            specs = [spec.to_dict() for spec in gateway.list_tools()]
        finally:
            gateway.close()
    for spec in specs:
        click.echo(f"{spec['server']:<16} {spec['name']:<28} {spec['description']}")


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8400, show_default=True)
@click.option("--provider-config", type=click.Path(exists=True), required=True)
@click.option("--gateway-config", type=click.Path(exists=True), default=None)
@click.option("--memory", type=MEMORY_CHOICES, default="on", show_default=True)
@click.option("--memory-file", type=click.Path(), default=None)
@click.option("--max-steps", type=int, default=5, show_default=True)
def serve(
    host: str,
    port: int,
    provider_config: str,
    gateway_config: str | None,
    memory: str,
    memory_file: str | None,
    max_steps: int,
) -> None:
    """Start the HTTP service; the evidence memory is shared across clients."""
    import uvicorn

    from .service import create_app

    engine = _engine(provider_config, gateway_config, memory_file, memory, max_steps)
    uvicorn.run(create_app(engine), host=host, port=port)


def main(argv: list[str] | None = None) -> None:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        sys.exit(1)
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        sys.exit(2)
    except (
        SchemaError,
        MismatchedDatasets,
        FormatError,
        ProviderError,
        ExecutorParseError,
        RemoteError,
        httpx.HTTPError,
        ValueError,
    ) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
