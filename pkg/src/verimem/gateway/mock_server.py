"""Deterministic stdio tool server for tests and offline runs.

Speaks JSON-RPC 2.0, one message per line, and implements the standard
tool-protocol methods: ``initialize``, ``tools/list``, ``tools/call``.

Behavior is driven by an optional JSON config file:

    {
      "default": "MOCK:{input}",
      "rules": [
        {"tool": "search_google", "pattern": "budget", "content": "..."},
        {"tool": "search_google", "pattern": "^boom$", "error": "tool blew up"},
        {"tool": "search_google", "pattern": "^KILL$", "behavior": "exit"}
      ]
    }

Rules are tried in order; ``pattern`` is a regex searched against the
input. Without a matching rule the default template answers, with
``{tool}`` and ``{input}`` placeholders. ``behavior: exit`` terminates
the process without replying, which is how tests simulate a server dying
mid-call.

Run as:  python -m verimem.gateway.mock_server [--config FILE] [--server NAME]
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from typing import Any, TextIO

from .catalog import DEFAULT_CATALOG, catalog_for_server
from .registry import ToolSpec

PROTOCOL_VERSION = "2024-11-05"

DEFAULT_TEMPLATE = "MOCK:{input}"

METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602


def _input_schema_json(spec: ToolSpec) -> dict[str, Any]:
    return {
        "type": "object",
        "properties": {name: {"type": "string"} for name in spec.input_schema},
        "required": [name for name, req in spec.input_schema.items() if req],
    }


class MockToolServer:
    def __init__(
        self,
        specs: tuple[ToolSpec, ...],
        rules: list[dict[str, Any]],
        default_template: str = DEFAULT_TEMPLATE,
        stdin: TextIO | None = None,
        stdout: TextIO | None = None,
    ):
        self.specs = specs
        self.rules = rules
        self.default_template = default_template
        self.stdin = stdin or sys.stdin
        self.stdout = stdout or sys.stdout

    def _send(self, message: dict[str, Any]) -> None:
        self.stdout.write(json.dumps(message) + "\n")
        self.stdout.flush()

    def _reply(self, request_id: Any, result: dict[str, Any]) -> None:
        self._send({"jsonrpc": "2.0", "id": request_id, "result": result})

    def _reply_error(self, request_id: Any, code: int, message: str) -> None:
        self._send(
            {"jsonrpc": "2.0", "id": request_id, "error": {"code": code, "message": message}}
        )

    def _tool_payload(self, tool: str, input_text: str) -> tuple[str, bool] | None:
        """Resolve (content, is_error) for a call, or None to exit silently."""
        for rule in self.rules:
            if rule.get("tool") not in (None, tool):
                continue
            pattern = rule.get("pattern", "")
            if pattern and not re.search(pattern, input_text):
                continue
            if rule.get("behavior") == "exit":
                return None
            if "error" in rule:
                return str(rule["error"]), True
            return str(rule.get("content", "")).replace("{input}", input_text), False
        content = self.default_template.replace("{tool}", tool).replace(
            "{input}", input_text
        )
        return content, False

    def handle(self, raw: str) -> bool:
        """Process one line; returns False when the server should stop."""
        try:
            message = json.loads(raw)
        except json.JSONDecodeError:
            return True
        method = message.get("method")
        request_id = message.get("id")
        if method is None:
            return True
        if request_id is None:
            # Notifications (e.g. the post-initialize one) need no reply.
            return True
        if method == "initialize":
            self._reply(
                request_id,
                {
                    "protocolVersion": PROTOCOL_VERSION,
                    "capabilities": {"tools": {}},
                    "serverInfo": {"name": "verimem-mock-tools", "version": "0.1.0"},
                },
            )
        elif method == "tools/list":
            self._reply(
                request_id,
                {
                    "tools": [
                        {
                            "name": spec.name,
                            "description": spec.description,
                            "inputSchema": _input_schema_json(spec),
                        }
                        for spec in self.specs
                    ]
                },
            )
        elif method == "tools/call":
            params = message.get("params") or {}
            name = params.get("name")
            spec = next((s for s in self.specs if s.name == name), None)
            if spec is None:
                self._reply_error(request_id, INVALID_PARAMS, f"unknown tool: {name}")
                return True
            arguments = params.get("arguments") or {}
            input_text = str(arguments.get(spec.primary_param(), ""))
            resolved = self._tool_payload(name, input_text)
            if resolved is None:
                return False
            content, is_error = resolved
            self._reply(
                request_id,
                {"content": [{"type": "text", "text": content}], "isError": is_error},
            )
        elif method == "ping":
            self._reply(request_id, {})
        else:
            self._reply_error(request_id, METHOD_NOT_FOUND, f"unknown method: {method}")
        return True

    def serve_forever(self) -> None:
        for line in self.stdin:
            line = line.strip()
            if not line:
                continue
            if not self.handle(line):
                return


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="Deterministic stdio tool server")
    parser.add_argument("--config", help="JSON file with canned-payload rules")
    parser.add_argument(
        "--server",
        help="serve only the catalog tools owned by this server name",
    )
    args = parser.parse_args(argv)

    rules: list[dict[str, Any]] = []
    default_template = DEFAULT_TEMPLATE
    if args.config:
        with open(args.config, encoding="utf-8") as handle:
            config = json.load(handle)
        rules = config.get("rules", [])
        default_template = config.get("default", DEFAULT_TEMPLATE)

    specs = catalog_for_server(args.server) if args.server else DEFAULT_CATALOG
    MockToolServer(specs, rules, default_template).serve_forever()


if __name__ == "__main__":
    main()
