"""Request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class ClaimIn(BaseModel):
    id: str = Field(min_length=1)
    text: str = Field(min_length=1)
    gold_label: Optional[str] = None
    dataset: str = ""


class VerifyOptions(BaseModel):
    memory: str = "on"
    max_steps: int = Field(default=5, ge=1)
    use_decomposer: bool = True


class VerifyRequest(BaseModel):
    claim: ClaimIn
    options: VerifyOptions = VerifyOptions()


class StepOut(BaseModel):
    thought: str
    action: dict[str, Any]
    observation: Optional[str] = None


class VerifyResponse(BaseModel):
    claim_id: str
    label: str
    rationale: str
    forced: bool
    steps: list[StepOut]
    tool_calls_issued: int
    tool_calls_succeeded: int
    memory_records: int
    evidence_stored: int


class ToolSpecOut(BaseModel):
    server: str
    name: str
    description: str
    input_schema: dict[str, bool]


class ToolListResponse(BaseModel):
    tools: list[ToolSpecOut]


class MemoryStatsResponse(BaseModel):
    keys: int
    records: int
    per_key_cap: int
    backing_path: Optional[str] = None


class RunRequest(BaseModel):
    dataset: str
    scheme: str = "true_false"
    memory: str = "on"
    memory_file: Optional[str] = None
    use_decomposer: bool = True
    max_steps: int = Field(default=5, ge=1)
    seed: Optional[int] = None
    trace_out: Optional[str] = None
    report_out: Optional[str] = None
    resume_report: Optional[str] = None


class RunResponse(BaseModel):
    report: dict[str, Any]
    summary: str


class CompareRequest(BaseModel):
    report_a: Optional[dict[str, Any]] = None
    report_b: Optional[dict[str, Any]] = None
    report_a_path: Optional[str] = None
    report_b_path: Optional[str] = None


class CompareResponse(BaseModel):
    comparison: dict[str, Any]
    summary: str


class SampleRequest(BaseModel):
    dataset: str
    scheme: str = "true_false"
    size: int = Field(ge=1)
    seed: int = 0
    out: Optional[str] = None


class SampleResponse(BaseModel):
    records: list[dict[str, Any]]
    written_to: Optional[str] = None


class HealthResponse(BaseModel):
    status: str
    version: str
