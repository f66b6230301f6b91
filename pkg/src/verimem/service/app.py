"""HTTP service wrapping the verification engine.

Endpoints mirror the CLI subcommands: single-claim verification, batch
runs, ablation comparison, stratified sampling, and the tool catalog.
The evidence store lives in the process and is shared across requests.
"""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..executor import ExecutorParseError, MemoryPolicy
from ..harness import (
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
from ..memory import FormatError
from ..models import Claim
from ..providers import ProviderError
from .schemas import (
    CompareRequest,
    CompareResponse,
    HealthResponse,
    MemoryStatsResponse,
    RunRequest,
    RunResponse,
    SampleRequest,
    SampleResponse,
    ToolListResponse,
    ToolSpecOut,
    VerifyRequest,
    VerifyResponse,
)
from .state import EngineState, parse_gold


def create_app(state: EngineState) -> FastAPI:
    app = FastAPI(title="verimem", version=__version__)
    app.state.engine = state

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/tools", response_model=ToolListResponse)
    def tools() -> ToolListResponse:
        specs = state.tool_catalog()
        return ToolListResponse(
            tools=[ToolSpecOut(**spec.to_dict()) for spec in specs]
        )

    @app.get("/memory/stats", response_model=MemoryStatsResponse)
    def memory_stats() -> MemoryStatsResponse:
        return MemoryStatsResponse(**state.memory_stats())

    @app.post("/verify", response_model=VerifyResponse)
    def verify_endpoint(request: VerifyRequest) -> VerifyResponse:
        try:
            claim = Claim(
                id=request.claim.id,
                text=request.claim.text,
                gold_label=parse_gold(request.claim.gold_label),
                dataset=request.claim.dataset,
            )
            policy = MemoryPolicy.from_text(request.options.memory)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        try:
            result = state.verify_claim(
                claim,
                policy=policy,
                t_max=request.options.max_steps,
                use_decomposer=request.options.use_decomposer,
            )
        except (ProviderError, ExecutorParseError) as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return VerifyResponse(**result)

    @app.post("/runs", response_model=RunResponse)
    def run_endpoint(request: RunRequest) -> RunResponse:
        config = RunConfig(
            dataset=request.dataset,
            scheme=request.scheme,
            memory=request.memory,
            memory_file=request.memory_file,
            use_decomposer=request.use_decomposer,
            t_max=request.max_steps,
            seed=request.seed,
            trace_out=request.trace_out,
            report_out=request.report_out,
            resume_report=request.resume_report,
        )
        try:
            with state.lock:
                report = run_batch(
                    config, provider=state.provider, gateway=state.gateway
                )
        except (SchemaError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except FormatError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except OSError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return RunResponse(report=report.to_dict(), summary=format_report(report))

    @app.post("/compare", response_model=CompareResponse)
    def compare_endpoint(request: CompareRequest) -> CompareResponse:
        def resolve(inline: dict[str, Any] | None, path: str | None) -> RunReport:
            if inline is not None:
                return RunReport.from_dict(inline)
            if path:
                return RunReport.load(path)
            raise HTTPException(
                status_code=422, detail="report missing: pass inline or a path"
            )

        report_a = resolve(request.report_a, request.report_a_path)
        report_b = resolve(request.report_b, request.report_b_path)
        try:
            comparison = ablation_compare(report_a, report_b)
        except MismatchedDatasets as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return CompareResponse(
            comparison=comparison, summary=format_comparison(comparison)
        )

    @app.post("/sample", response_model=SampleResponse)
    def sample_endpoint(request: SampleRequest) -> SampleResponse:
        try:
            records = load_dataset(request.dataset, request.scheme)
            sampled = stratified_sample(records, request.size, request.seed)
        except (SchemaError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except OSError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        written_to = None
        if request.out:
            write_dataset(sampled, request.out)
            written_to = request.out
        return SampleResponse(
            records=[
                {
                    "id": record.id,
                    "claim": record.claim,
                    "label": record.raw_label,
                    "tag": record.tag,
                }
                for record in sampled
            ],
            written_to=written_to,
        )

    return app
