"""Core value types shared across the verification pipeline.

All types are immutable value objects with a canonical flat-JSON
serialization: lower_snake_case field names, timestamps as RFC 3339
strings at second resolution.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Union


class VeracityLabel(Enum):
    """Binary verdict label. SUPPORTED/REFUTED map to TRUE/FALSE at ingestion."""

    TRUE = "true"
    FALSE = "false"

    @classmethod
    def from_text(cls, text: str) -> "VeracityLabel":
        value = text.strip().lower()
        if value in ("true", "supported"):
            return cls.TRUE
        if value in ("false", "refuted"):
            return cls.FALSE
        raise ValueError(f"not a veracity label: {text!r}")

    def __str__(self) -> str:
        return self.value


def utc_now_second() -> datetime:
    """Current UTC instant truncated to whole seconds."""
    return datetime.now(timezone.utc).replace(microsecond=0)


def format_timestamp(moment: datetime) -> str:
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    moment = moment.astimezone(timezone.utc).replace(microsecond=0)
    return moment.isoformat().replace("+00:00", "Z")


def parse_timestamp(text: str) -> datetime:
    return datetime.fromisoformat(text.replace("Z", "+00:00")).astimezone(timezone.utc)


def normalize_entity(text: str) -> str:
    """Normalize an entity key: trim, collapse internal whitespace, lowercase."""
    return " ".join(text.split()).lower()


@dataclass(frozen=True, slots=True)
class Claim:
    """One verification task."""

    id: str
    text: str
    gold_label: VeracityLabel | None = None
    dataset: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("claim id must be non-empty")
        if not self.text.strip():
            raise ValueError("claim text must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "text": self.text,
            "gold_label": self.gold_label.value if self.gold_label else None,
            "dataset": self.dataset,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Claim":
        gold = data.get("gold_label")
        return cls(
            id=data["id"],
            text=data["text"],
            gold_label=VeracityLabel.from_text(gold) if gold else None,
            dataset=data.get("dataset", ""),
        )


@dataclass(frozen=True, slots=True)
class Triplet:
    """One atomic assertion: (subject, relation, object, attributes).

    The object may be empty only in the degenerate decomposition built when
    structured extraction fails; parsed triplets always carry all three parts.
    """

    subject: str
    relation: str
    object: str
    attributes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.subject.strip():
            raise ValueError("triplet subject must be non-empty")
        if not self.relation.strip():
            raise ValueError("triplet relation must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "subject": self.subject,
            "relation": self.relation,
            "object": self.object,
            "attributes": list(self.attributes),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Triplet":
        return cls(
            subject=data["subject"],
            relation=data["relation"],
            object=data["object"],
            attributes=tuple(data.get("attributes", ())),
        )


@dataclass(frozen=True, slots=True)
class Decomposition:
    """Structured view of a claim: assertion triplets plus topic keywords."""

    triplets: tuple[Triplet, ...]
    topics: tuple[str, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "triplets": [t.to_dict() for t in self.triplets],
            "topics": list(self.topics),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Decomposition":
        return cls(
            triplets=tuple(Triplet.from_dict(t) for t in data.get("triplets", ())),
            topics=tuple(data.get("topics", ())),
        )


def entities_of(decomposition: Decomposition) -> list[str]:
    """Entity keys of a decomposition: normalized subjects and objects.

    Deduplicated, first-appearance order preserved. Empty strings (possible
    for the degenerate fallback object) contribute no key.
    """
    keys: list[str] = []
    seen: set[str] = set()
    for triplet in decomposition.triplets:
        for raw in (triplet.subject, triplet.object):
            key = normalize_entity(raw)
            if key and key not in seen:
                seen.add(key)
                keys.append(key)
    return keys


@dataclass(frozen=True, slots=True)
class EvidenceRecord:
    """One retrieved evidence item with its source metadata."""

    content: str
    tool: str
    query: str
    timestamp: datetime
    claim_id: str

    def __post_init__(self) -> None:
        if not self.content:
            raise ValueError("evidence content must be non-empty")

    def identity(self) -> tuple[str, str, str]:
        """Dedup key: records are identical when (content, tool, query) match."""
        return (self.content, self.tool, self.query)

    def to_dict(self) -> dict[str, Any]:
        return {
            "content": self.content,
            "tool": self.tool,
            "query": self.query,
            "timestamp": format_timestamp(self.timestamp),
            "claim_id": self.claim_id,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EvidenceRecord":
        return cls(
            content=data["content"],
            tool=data["tool"],
            query=data["query"],
            timestamp=parse_timestamp(data["timestamp"]),
            claim_id=data["claim_id"],
        )


@dataclass(frozen=True, slots=True)
class ToolCall:
    """Agent action requesting one tool invocation."""

    tool: str
    reason: str
    input: str


@dataclass(frozen=True, slots=True)
class Answer:
    """Terminal agent action carrying the verdict label."""

    label: VeracityLabel


Action = Union[ToolCall, Answer]


def action_to_dict(action: Action) -> dict[str, Any]:
    if isinstance(action, ToolCall):
        return {
            "type": "tool_call",
            "tool": action.tool,
            "reason": action.reason,
            "input": action.input,
        }
    return {"type": "answer", "label": action.label.value}


def action_from_dict(data: dict[str, Any]) -> Action:
    if data["type"] == "tool_call":
        return ToolCall(tool=data["tool"], reason=data["reason"], input=data["input"])
    if data["type"] == "answer":
        return Answer(label=VeracityLabel.from_text(data["label"]))
    raise ValueError(f"unknown action type: {data['type']!r}")


@dataclass(frozen=True, slots=True)
class Step:
    """One reasoning cycle: thought, action, and (for tool calls) observation."""

    thought: str
    action: Action
    observation: str | None = None

    def __post_init__(self) -> None:
        if isinstance(self.action, ToolCall) and self.observation is None:
            raise ValueError("tool-call steps must carry an observation")
        if isinstance(self.action, Answer) and self.observation is not None:
            raise ValueError("answer steps carry no observation")

    def to_dict(self) -> dict[str, Any]:
        return {
            "thought": self.thought,
            "action": action_to_dict(self.action),
            "observation": self.observation,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Step":
        return cls(
            thought=data["thought"],
            action=action_from_dict(data["action"]),
            observation=data.get("observation"),
        )


@dataclass(frozen=True, slots=True)
class Verdict:
    """Final judgment for a claim with a human-readable rationale."""

    label: VeracityLabel
    rationale: str
    trajectory_ref: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label.value,
            "rationale": self.rationale,
            "trajectory_ref": self.trajectory_ref,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Verdict":
        return cls(
            label=VeracityLabel.from_text(data["label"]),
            rationale=data["rationale"],
            trajectory_ref=data["trajectory_ref"],
        )


@dataclass(frozen=True, slots=True)
class Trajectory:
    """Ordered reasoning history for one claim, append-only."""

    claim_id: str
    steps: tuple[Step, ...] = ()
    verdict: Verdict | None = None
    forced: bool = False

    def with_step(self, step: Step) -> "Trajectory":
        """Extend the history by exactly one step."""
        return Trajectory(
            claim_id=self.claim_id,
            steps=self.steps + (step,),
            verdict=self.verdict,
            forced=self.forced,
        )

    def with_outcome(self, verdict: Verdict, forced: bool) -> "Trajectory":
        return Trajectory(
            claim_id=self.claim_id,
            steps=self.steps,
            verdict=verdict,
            forced=forced,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "claim_id": self.claim_id,
            "steps": [s.to_dict() for s in self.steps],
            "verdict": self.verdict.to_dict() if self.verdict else None,
            "forced": self.forced,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Trajectory":
        verdict = data.get("verdict")
        return cls(
            claim_id=data["claim_id"],
            steps=tuple(Step.from_dict(s) for s in data.get("steps", ())),
            verdict=Verdict.from_dict(verdict) if verdict else None,
            forced=data.get("forced", False),
        )
