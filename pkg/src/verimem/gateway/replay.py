"""Replay gateway serving recorded (tool, input) -> content fixtures.

Fixtures are JSON lines of {"tool": ..., "input": ..., "content": ...}.
Lookups are exact; a miss is a deterministic error observation, never a
live call, which keeps desk-scale runs reproducible byte for byte.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Mapping

from .catalog import DEFAULT_CATALOG
from .registry import ToolGateway, ToolSpec


class ReplayGateway(ToolGateway):
    def __init__(
        self,
        fixtures: Iterable[Mapping[str, Any]] = (),
        specs: Iterable[ToolSpec] = DEFAULT_CATALOG,
        **kwargs: Any,
    ):
        super().__init__(specs, **kwargs)
        self._recorded: dict[tuple[str, str], str] = {}
        for fixture in fixtures:
            self._recorded[(fixture["tool"], fixture["input"])] = fixture["content"]

    @classmethod
    def from_jsonl(cls, path: str | Path, **kwargs: Any) -> "ReplayGateway":
        fixtures = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    fixtures.append(json.loads(line))
        return cls(fixtures, **kwargs)

    def _call(self, spec: ToolSpec, input_text: str) -> tuple[str, bool]:
        content = self._recorded.get((spec.name, input_text))
        if content is None:
            return (
                f"Error: no recorded result for tool '{spec.name}' "
                f"with input '{input_text}'",
                True,
            )
        return content, False
