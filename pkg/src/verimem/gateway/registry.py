"""Tool registry, invocation results, and per-run call accounting."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

MAX_OBSERVATION_CHARS = 4000


class GatewayNotConnected(Exception):
    """Gateway used before its servers were connected."""


class RegistryConflict(Exception):
    """Two tools with the same (server, name) were registered."""


class ToolNotFound(Exception):
    """Unregistered tool name; distinct from a tool-level failure because
    the agent may hallucinate names and the observation must say so."""

    def __init__(self, name: str, available: Iterable[str]):
        self.name = name
        self.available = sorted(available)
        super().__init__(f"unknown tool {name!r}")


def unknown_tool_observation(name: str, available: Iterable[str]) -> str:
    return f"Error: unknown tool '{name}'. Available tools: {', '.join(sorted(available))}"


@dataclass(frozen=True)
class ToolSpec:
    """One callable tool: owning server, name, and its string parameters."""

    server: str
    name: str
    description: str
    input_schema: Mapping[str, bool] = field(default_factory=dict)

    def primary_param(self) -> str:
        """Parameter that receives the agent's single input string."""
        for param, required in self.input_schema.items():
            if required:
                return param
        return next(iter(self.input_schema), "query")

    def to_dict(self) -> dict[str, Any]:
        return {
            "server": self.server,
            "name": self.name,
            "description": self.description,
            "input_schema": dict(self.input_schema),
        }


@dataclass(frozen=True, slots=True)
class ToolResult:
    """Outcome of one tool invocation, error or not."""

    tool: str
    input: str
    content: str
    is_error: bool = False
    latency_ms: float = 0.0

    def __post_init__(self) -> None:
        if self.is_error and not self.content:
            raise ValueError("error results must carry a diagnostic")


class CallCounter:
    """Per-run tool-call accounting.

    ``issued`` counts every query the agent sent, including hallucinated
    names, duplicates answered from history, and calls suppressed in
    memory-only mode. ``succeeded`` counts only real invocations that
    returned a non-error payload, so either convention is recoverable
    from a report.
    """

    def __init__(self) -> None:
        self.issued: dict[str, int] = {}
        self.succeeded: dict[str, int] = {}

    def record_issued(self, tool_name: str) -> None:
        self.issued[tool_name] = self.issued.get(tool_name, 0) + 1

    def record_succeeded(self, tool_name: str) -> None:
        self.succeeded[tool_name] = self.succeeded.get(tool_name, 0) + 1

    @property
    def issued_total(self) -> int:
        return sum(self.issued.values())

    @property
    def succeeded_total(self) -> int:
        return sum(self.succeeded.values())

    def merge(self, other: "CallCounter") -> None:
        for tool, count in other.issued.items():
            self.issued[tool] = self.issued.get(tool, 0) + count
        for tool, count in other.succeeded.items():
            self.succeeded[tool] = self.succeeded.get(tool, 0) + count

    def snapshot(self) -> dict[str, Any]:
        return {
            "issued_total": self.issued_total,
            "succeeded_total": self.succeeded_total,
            "per_tool_issued": dict(sorted(self.issued.items())),
            "per_tool_succeeded": dict(sorted(self.succeeded.items())),
        }


def build_registry(specs: Iterable[ToolSpec]) -> dict[str, ToolSpec]:
    """Index specs by tool name, rejecting duplicate (server, name) pairs."""
    seen: set[tuple[str, str]] = set()
    registry: dict[str, ToolSpec] = {}
    for spec in specs:
        key = (spec.server, spec.name)
        if key in seen:
            raise RegistryConflict(f"duplicate tool {spec.name!r} on {spec.server!r}")
        seen.add(key)
        registry.setdefault(spec.name, spec)
    return registry


class ToolGateway:
    """Base for tool backends: name resolution, truncation, latency.

    Subclasses implement ``_call`` and never raise for tool-level
    failures; those come back as error results so the agent can re-plan.
    """

    def __init__(
        self,
        specs: Iterable[ToolSpec],
        max_observation_chars: int = MAX_OBSERVATION_CHARS,
    ):
        self._registry = build_registry(specs)
        self.max_observation_chars = max_observation_chars

    def list_tools(self) -> list[ToolSpec]:
        return list(self._registry.values())

    def tool_names(self) -> list[str]:
        return list(self._registry)

    def invoke(self, tool_name: str, input_text: str) -> ToolResult:
        spec = self._registry.get(tool_name)
        if spec is None:
            raise ToolNotFound(tool_name, self._registry)
        started = time.monotonic()
        content, is_error = self._call(spec, input_text)
        latency_ms = (time.monotonic() - started) * 1000.0
        return ToolResult(
            tool=tool_name,
            input=input_text,
            content=content[: self.max_observation_chars],
            is_error=is_error,
            latency_ms=latency_ms,
        )

    def _call(self, spec: ToolSpec, input_text: str) -> tuple[str, bool]:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __enter__(self) -> "ToolGateway":
        return self

    def __exit__(self, *exc_info: Any) -> None:
        self.close()
