"""Chat-completion backends.

The pipeline talks to a backend through a single text-in / text-out call,
so the same loop runs against a live HTTP endpoint or the deterministic
scripted double used in tests. Structured vendor tool-calling APIs are
deliberately not used; the agent grammar lives in the prompt text.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Protocol, Sequence

import httpx

VALID_ROLES = ("system", "user", "assistant")


class ProviderError(Exception):
    """Backend returned a non-success status or an unusable response."""


class TransportError(ProviderError):
    """Network failure or timeout after all retries were exhausted."""


class ScriptExhaustedError(ProviderError):
    """A scripted provider ran out of canned responses."""


@dataclass(frozen=True, slots=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in VALID_ROLES:
            raise ValueError(f"invalid role: {self.role!r}")
        if not self.content:
            raise ValueError("message content must be non-empty")


@dataclass(frozen=True, slots=True)
class ProviderConfig:
    """Connection settings for a chat-completion endpoint.

    The credential never lives in the config itself: only the name of the
    environment variable that holds it.
    """

    endpoint: str
    model: str
    timeout: float = 30.0
    max_retries: int = 2
    temperature: float = 0.0
    api_key_env: str = "OPENAI_API_KEY"

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ProviderConfig":
        return cls(
            endpoint=data["endpoint"],
            model=data["model"],
            timeout=float(data.get("timeout", 30.0)),
            max_retries=int(data.get("max_retries", 2)),
            temperature=float(data.get("temperature", 0.0)),
            api_key_env=data.get("api_key_env", "OPENAI_API_KEY"),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ProviderConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


class Provider(Protocol):
    def complete(self, messages: Sequence[ChatMessage]) -> str: ...


class ScriptedProvider:
    """Deterministic provider returning canned responses in order.

    Single consumer: exhaustion raises, it never wraps around.
    """

    def __init__(self, script: Sequence[str]):
        self._script = list(script)
        self._cursor = 0

    @property
    def consumed(self) -> int:
        return self._cursor

    @property
    def remaining(self) -> int:
        return len(self._script) - self._cursor

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        if not messages:
            raise ValueError("messages must be non-empty")
        if self._cursor >= len(self._script):
            raise ScriptExhaustedError(
                f"script exhausted after {self._cursor} responses"
            )
        response = self._script[self._cursor]
        self._cursor += 1
        return response


class HttpProvider:
    """Client for an industry-standard chat-completion HTTP endpoint.

    Request: JSON with the model id and the ordered messages array.
    Response: JSON carrying the assistant text. Failed attempts are retried
    with exponential backoff up to ``max_retries`` extra attempts.
    """

    def __init__(
        self,
        config: ProviderConfig,
        client: httpx.Client | None = None,
        backoff_base: float = 0.5,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self._client = client or httpx.Client(timeout=config.timeout)
        self._backoff_base = backoff_base
        self._sleep = sleep

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        if not messages:
            raise ValueError("messages must be non-empty")
        payload = {
            "model": self.config.model,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": self.config.temperature,
        }
        attempts = 1 + self.config.max_retries
        last_error: ProviderError | None = None
        for attempt in range(attempts):
            if attempt:
                self._sleep(self._backoff_base * 2 ** (attempt - 1))
            try:
                response = self._client.post(
                    self.config.endpoint, json=payload, headers=self._headers()
                )
            except httpx.HTTPError as exc:
                last_error = TransportError(f"transport failure: {exc}")
                continue
            if response.status_code >= 400:
                last_error = ProviderError(
                    f"endpoint returned status {response.status_code}: "
                    f"{response.text[:200]}"
                )
                continue
            return self._extract_text(response)
        assert last_error is not None
        raise last_error

    @staticmethod
    def _extract_text(response: httpx.Response) -> str:
        try:
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed completion response: {exc}") from exc

    def close(self) -> None:
        self._client.close()


def provider_from_config(config: dict[str, Any] | str | Path) -> Provider:
    """Build a provider from a config mapping or a JSON config file.

    ``{"type": "http", ...ProviderConfig fields...}`` for a live endpoint;
    ``{"type": "scripted", "script": [...]}`` (or ``"script_path"`` pointing
    at a JSON array of strings) for deterministic runs.
    """
    if isinstance(config, (str, Path)):
        config = json.loads(Path(config).read_text(encoding="utf-8"))
    kind = config.get("type", "http")
    if kind == "scripted":
        if "script_path" in config:
            script = json.loads(
                Path(config["script_path"]).read_text(encoding="utf-8")
            )
        else:
            script = config.get("script", [])
        if not isinstance(script, list):
            raise ValueError("scripted provider needs a list of responses")
        return ScriptedProvider(script)
    if kind == "http":
        return HttpProvider(ProviderConfig.from_dict(config))
    raise ValueError(f"unknown provider type: {kind!r}")
