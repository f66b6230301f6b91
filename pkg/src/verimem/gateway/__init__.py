"""Tool access layer: registry, protocol client, and deterministic doubles."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .catalog import DEFAULT_CATALOG, SERVER_NAMES, catalog_for_server
from .mcp import McpGateway, McpServerConnection, mock_server_command
from .registry import (
    MAX_OBSERVATION_CHARS,
    CallCounter,
    GatewayNotConnected,
    RegistryConflict,
    ToolGateway,
    ToolNotFound,
    ToolResult,
    ToolSpec,
    unknown_tool_observation,
)
from .replay import ReplayGateway

__all__ = [
    "MAX_OBSERVATION_CHARS",
    "DEFAULT_CATALOG",
    "SERVER_NAMES",
    "CallCounter",
    "GatewayNotConnected",
    "McpGateway",
    "McpServerConnection",
    "RegistryConflict",
    "ReplayGateway",
    "ToolGateway",
    "ToolNotFound",
    "ToolResult",
    "ToolSpec",
    "catalog_for_server",
    "gateway_from_config",
    "mock_server_command",
    "unknown_tool_observation",
]


def gateway_from_config(config: dict[str, Any] | str | Path | None) -> ToolGateway:
    """Build a gateway from a config mapping or JSON config file.

    ``{"type": "mock"}`` spawns the bundled stdio mock servers (optional
    ``"config"`` path with canned-payload rules); ``{"type": "replay",
    "fixtures": path}`` serves recorded results; ``{"type": "mcp",
    "servers": [{"name": ..., "command": [...]}]}`` connects external
    protocol servers.
    """
    if config is None:
        config = {"type": "mock"}
    if isinstance(config, (str, Path)):
        config = json.loads(Path(config).read_text(encoding="utf-8"))
    kind = config.get("type", "mock")
    if kind == "replay":
        return ReplayGateway.from_jsonl(config["fixtures"])
    if kind == "mock":
        rules_path = config.get("config")
        connections = [
            McpServerConnection(name, mock_server_command(name, rules_path))
            for name in SERVER_NAMES
        ]
        return McpGateway(connections)
    if kind == "mcp":
        connections = [
            McpServerConnection(server["name"], server["command"])
            for server in config.get("servers", ())
        ]
        return McpGateway(connections)
    raise ValueError(f"unknown gateway type: {kind!r}")
