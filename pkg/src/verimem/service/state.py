"""Long-lived engine behind the HTTP endpoints.

The service owns one provider, one gateway, and one shared evidence
store. Verification sessions from any client accumulate evidence in the
same store, which is the whole point of running this as a service: the
memory warms up across claims and clients. A lock enforces the
exclusive-writer contract; sessions run one at a time.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Any

from ..executor import MemoryPolicy
from ..gateway import ToolGateway, ToolSpec, gateway_from_config
from ..harness.runner import process_claim
from ..memory import DEFAULT_PER_KEY_CAP, MemoryStore
from ..models import Claim, VeracityLabel
from ..providers import Provider, provider_from_config


class EngineState:
    def __init__(
        self,
        provider: Provider,
        gateway: ToolGateway | None,
        store: MemoryStore,
        default_policy: MemoryPolicy = MemoryPolicy.ON,
        default_t_max: int = 5,
    ):
        self.provider = provider
        self.gateway = gateway
        self.store = store
        self.default_policy = default_policy
        self.default_t_max = default_t_max
        self.lock = threading.Lock()

    @classmethod
    def from_config(
        cls,
        provider_config: dict[str, Any] | str | Path,
        gateway_config: dict[str, Any] | str | Path | None = None,
        memory_file: str | Path | None = None,
        per_key_cap: int = DEFAULT_PER_KEY_CAP,
        default_policy: MemoryPolicy = MemoryPolicy.ON,
        default_t_max: int = 5,
    ) -> "EngineState":
        provider = provider_from_config(provider_config)
        gateway = None
        if default_policy is not MemoryPolicy.ONLY:
            gateway = gateway_from_config(gateway_config)
        if memory_file and Path(memory_file).exists():
            store = MemoryStore.load(memory_file, per_key_cap=per_key_cap)
        else:
            store = MemoryStore(per_key_cap=per_key_cap, backing_path=memory_file)
        return cls(provider, gateway, store, default_policy, default_t_max)

    def verify_claim(
        self,
        claim: Claim,
        policy: MemoryPolicy | None = None,
        t_max: int | None = None,
        use_decomposer: bool = True,
    ) -> dict[str, Any]:
        policy = policy or self.default_policy
        t_max = t_max or self.default_t_max
        gateway = None if policy is MemoryPolicy.ONLY else self.gateway
        with self.lock:
            row, outcome = process_claim(
                claim,
                self.provider,
                gateway,
                self.store,
                policy,
                t_max,
                use_decomposer,
            )
            if (
                policy in (MemoryPolicy.ON, MemoryPolicy.FIRST)
                and self.store.backing_path
            ):
                self.store.persist()
        return {
            "claim_id": claim.id,
            "label": outcome.verdict.label.value,
            "rationale": outcome.verdict.rationale,
            "forced": outcome.trajectory.forced,
            "steps": [step.to_dict() for step in outcome.trajectory.steps],
            "tool_calls_issued": row.tool_calls_issued,
            "tool_calls_succeeded": row.tool_calls_succeeded,
            "memory_records": row.memory_records,
            "evidence_stored": len(outcome.delta),
        }

    def tool_catalog(self) -> list[ToolSpec]:
        if self.gateway is None:
            return []
        return self.gateway.list_tools()

    def memory_stats(self) -> dict[str, Any]:
        return {
            "keys": self.store.key_count,
            "records": self.store.record_count,
            "per_key_cap": self.store.per_key_cap,
            "backing_path": str(self.store.backing_path)
            if self.store.backing_path
            else None,
        }

    def close(self) -> None:
        if self.gateway is not None:
            self.gateway.close()


def parse_gold(raw: str | None) -> VeracityLabel | None:
    return VeracityLabel.from_text(raw) if raw else None
