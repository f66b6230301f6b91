"""JSON-RPC 2.0 client for stdio tool servers.

Implements the tool-protocol handshake (``initialize`` then the
initialized notification) plus ``tools/list`` and ``tools/call`` against
a server subprocess, one JSON message per line. A reader thread feeds a
queue so requests can time out instead of blocking on a dead pipe; a
server that dies mid-call surfaces as a transport failure, which the
gateway converts into an error observation rather than a crash.
"""

from __future__ import annotations

import json
import queue
import subprocess
import sys
import threading
from typing import Any, Iterable, Sequence

from .registry import GatewayNotConnected, ToolGateway, ToolSpec

PROTOCOL_VERSION = "2024-11-05"
CLIENT_INFO = {"name": "verimem", "version": "0.1.0"}


class McpTransportError(Exception):
    """Pipe closed, process died, or the response timed out."""


class McpProtocolError(Exception):
    """Server answered with a JSON-RPC error object."""


class McpServerConnection:
    """One stdio server subprocess with synchronous request/response calls."""

    def __init__(self, name: str, command: Sequence[str], timeout: float = 15.0):
        self.name = name
        self.command = list(command)
        self.timeout = timeout
        self._process: subprocess.Popen[str] | None = None
        self._responses: "queue.Queue[dict[str, Any] | None]" = queue.Queue()
        self._next_id = 0
        self._lock = threading.Lock()

    def start(self) -> None:
        self._process = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
        )
        threading.Thread(target=self._read_loop, daemon=True).start()
        self._request("initialize", {
            "protocolVersion": PROTOCOL_VERSION,
            "capabilities": {},
            "clientInfo": CLIENT_INFO,
        })
        self._notify("notifications/initialized", {})

    def _read_loop(self) -> None:
        assert self._process and self._process.stdout
        for line in self._process.stdout:
            line = line.strip()
            if not line:
                continue
            try:
                self._responses.put(json.loads(line))
            except json.JSONDecodeError:
                continue
        self._responses.put(None)  # EOF marker

    def _write(self, message: dict[str, Any]) -> None:
        if self._process is None or self._process.stdin is None:
            raise McpTransportError(f"server {self.name!r} not started")
        try:
            self._process.stdin.write(json.dumps(message) + "\n")
            self._process.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise McpTransportError(f"server {self.name!r} pipe closed: {exc}") from exc

    def _notify(self, method: str, params: dict[str, Any]) -> None:
        self._write({"jsonrpc": "2.0", "method": method, "params": params})

    def _request(self, method: str, params: dict[str, Any]) -> dict[str, Any]:
        with self._lock:
            self._next_id += 1
            request_id = self._next_id
            self._write(
                {"jsonrpc": "2.0", "id": request_id, "method": method, "params": params}
            )
            while True:
                try:
                    message = self._responses.get(timeout=self.timeout)
                except queue.Empty:
                    raise McpTransportError(
                        f"server {self.name!r} timed out on {method}"
                    ) from None
                if message is None:
                    raise McpTransportError(
                        f"server {self.name!r} closed the connection during {method}"
                    )
                if message.get("id") != request_id:
                    continue  # stray message for an older request
                if "error" in message:
                    error = message["error"]
                    raise McpProtocolError(
                        f"{error.get('message', 'error')} (code {error.get('code')})"
                    )
                return message.get("result", {})

    def list_tools(self) -> list[dict[str, Any]]:
        return self._request("tools/list", {}).get("tools", [])

    def call_tool(self, name: str, arguments: dict[str, Any]) -> tuple[str, bool]:
        result = self._request("tools/call", {"name": name, "arguments": arguments})
        chunks = [
            item.get("text", "")
            for item in result.get("content", [])
            if isinstance(item, dict) and item.get("type") == "text"
        ]
        return "\n".join(chunks), bool(result.get("isError", False))

    def close(self) -> None:
        if self._process is None:
            return
        try:
            if self._process.stdin:
                self._process.stdin.close()
            self._process.terminate()
            self._process.wait(timeout=5)
        except Exception:
            self._process.kill()


def _spec_from_wire(server: str, tool: dict[str, Any]) -> ToolSpec:
    schema = tool.get("inputSchema") or {}
    properties = schema.get("properties") or {}
    required = set(schema.get("required") or ())
    return ToolSpec(
        server=server,
        name=tool["name"],
        description=tool.get("description", ""),
        input_schema={name: name in required for name in properties},
    )


class McpGateway(ToolGateway):
    """Routes tool calls to the owning stdio server connection."""

    def __init__(self, connections: Iterable[McpServerConnection], **kwargs: Any):
        self._connections = list(connections)
        self._by_server: dict[str, McpServerConnection] = {}
        specs: list[ToolSpec] = []
        for connection in self._connections:
            connection.start()
            self._by_server[connection.name] = connection
            specs.extend(
                _spec_from_wire(connection.name, tool)
                for tool in connection.list_tools()
            )
        super().__init__(specs, **kwargs)

    def _call(self, spec: ToolSpec, input_text: str) -> tuple[str, bool]:
        connection = self._by_server.get(spec.server)
        if connection is None:
            raise GatewayNotConnected(f"no connection for server {spec.server!r}")
        try:
            return connection.call_tool(spec.name, {spec.primary_param(): input_text})
        except McpTransportError as exc:
            return f"Error: tool call failed: {exc}", True
        except McpProtocolError as exc:
            return f"Error: tool call rejected: {exc}", True

    def close(self) -> None:
        for connection in self._connections:
            connection.close()


def mock_server_command(server: str | None = None, config: str | None = None) -> list[str]:
    """Command line that launches the bundled mock server."""
    command = [sys.executable, "-m", "verimem.gateway.mock_server"]
    if server:
        command += ["--server", server]
    if config:
        command += ["--config", config]
    return command
