"""Helpers for digging JSON out of model output.

Models wrap payloads in markdown fences or surrounding prose despite
instructions not to; these utilities strip fences and locate the first
balanced JSON value so parsers can stay strict about the payload itself.
"""

from __future__ import annotations

import json
import re
from typing import Any

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*\s*\n?(.*?)\n?\s*```", re.DOTALL)


def strip_fences(text: str) -> str:
    """Return the content of the first markdown code fence, if any."""
    match = _FENCE_RE.search(text)
    if match:
        return match.group(1).strip()
    return text.strip()


def _scan_balanced(text: str, start: int) -> str | None:
    """Return the balanced JSON object/array starting at ``start``, or None."""
    opener = text[start]
    closer = {"{": "}", "[": "]"}[opener]
    depth = 0
    in_string = False
    escaped = False
    for index in range(start, len(text)):
        char = text[index]
        if in_string:
            if escaped:
                escaped = False
            elif char == "\\":
                escaped = True
            elif char == '"':
                in_string = False
            continue
        if char == '"':
            in_string = True
        elif char in "{[":
            depth += 1
        elif char in "}]":
            depth -= 1
            if depth == 0:
                candidate = text[start : index + 1]
                if candidate[-1] != closer:
                    return None
                return candidate
    return None


def first_json_value(text: str, openers: str = "{[") -> Any:
    """Parse the first balanced JSON value found in ``text``.

    Raises ValueError when no parseable value exists.
    """
    for index, char in enumerate(text):
        if char not in openers:
            continue
        candidate = _scan_balanced(text, index)
        if candidate is None:
            continue
        try:
            return json.loads(candidate)
        except json.JSONDecodeError:
            continue
    raise ValueError("no JSON value found")


def first_json_object(text: str) -> dict[str, Any]:
    """Parse the first balanced JSON object found in ``text``."""
    value = first_json_value(text, openers="{")
    if not isinstance(value, dict):
        raise ValueError("no JSON object found")
    return value
