"""Iterative verification loop: Thought -> Action -> Observation.

Each step renders the full context (claim, background decomposition,
recalled memory, history so far, tool list), asks the provider for one
JSON object, and either answers or invokes a tool. The loop is bounded:
after ``t_max`` steps without an answer the agent is forced to judge, and
if even that fails the verdict falls closed to FALSE. Tool failures are
observations, never aborts, so the agent can re-plan around them.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from importlib import resources
from typing import Callable, Sequence

from .gateway import CallCounter, ToolGateway, ToolNotFound, unknown_tool_observation
from .jsontext import first_json_object, strip_fences
from .memory import EVIDENCE_MAX_CHARS, MemoryStore
from .models import (
    Action,
    Answer,
    Claim,
    Decomposition,
    EvidenceRecord,
    Step,
    ToolCall,
    Trajectory,
    VeracityLabel,
    Verdict,
    entities_of,
    utc_now_second,
)
from .providers import ChatMessage, Provider

DEFAULT_T_MAX = 5

CORRECTIVE_REPROMPT = (
    "Your last output was not valid JSON. Respond with only the JSON object."
)
FORCE_RETRY_REPROMPT = (
    "You must answer now. Respond with only the final-answer JSON object."
)
TOOLS_UNAVAILABLE_NOTE = "Tools unavailable; rely on provided memory and reasoning"
DUPLICATE_PREFIX = "NOTE: duplicate query; previous result repeated:"
FORCED_DEFAULT_RATIONALE = "forced default: could not elicit a verdict"
MEMORY_FIRST_DIRECTIVE = (
    "Prioritize the memory above; issue new tool queries only when it is insufficient."
)


class MemoryPolicy(Enum):
    OFF = "off"
    ON = "on"
    FIRST = "first"
    ONLY = "only"

    @classmethod
    def from_text(cls, text: str) -> "MemoryPolicy":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"not a memory policy: {text!r}") from None


class AgentParseError(Exception):
    """Provider output was not a usable agent JSON object."""


class ExecutorParseError(Exception):
    """Two consecutive provider outputs were unparseable for one step."""


@dataclass(frozen=True, slots=True)
class AgentOutput:
    thought: str
    action: Action


@dataclass(frozen=True, slots=True)
class VerifyOutcome:
    verdict: Verdict
    trajectory: Trajectory
    delta: tuple[EvidenceRecord, ...]
    recalled: tuple[EvidenceRecord, ...]
    provider_calls: int


def _load_template(name: str) -> str:
    return resources.files("verimem.prompts").joinpath(name).read_text("utf-8")


_EXECUTOR_TEMPLATE = _load_template("executor.txt")
_FORCE_TEMPLATE = _load_template("force_answer.txt")


def parse_agent_output(raw: str) -> AgentOutput:
    """Read one agent JSON object from raw model output.

    Markdown fences are stripped and surrounding prose is discarded; the
    payload itself must carry an "answer" (True/False, case-insensitive)
    or an "action" with a tool name. When both appear, the answer wins:
    terminal intent dominates.
    """
    try:
        payload = first_json_object(strip_fences(raw))
    except ValueError:
        raise AgentParseError("no JSON object in output") from None
    thought = str(payload.get("thought", ""))

    if "answer" in payload:
        value = payload["answer"]
        text = str(value).strip().lower()
        if text not in ("true", "false"):
            raise AgentParseError(f"answer not in {{true, false}}: {value!r}")
        return AgentOutput(thought, Answer(VeracityLabel.from_text(text)))

    if "action" in payload:
        action = payload["action"]
        if not isinstance(action, dict):
            raise AgentParseError("action must be an object")
        name = str(action.get("name") or "").strip()
        if not name:
            raise AgentParseError("action lacks a tool name")
        reason = "" if action.get("reason") is None else str(action["reason"])
        input_text = "" if action.get("input") is None else str(action["input"])
        return AgentOutput(thought, ToolCall(name, reason, input_text))

    raise AgentParseError("output lacks both 'answer' and 'action'")


def render_background(decomposition: Decomposition) -> str:
    lines = ["Triplets:"]
    for triplet in decomposition.triplets:
        line = f"- ({triplet.subject} | {triplet.relation} | {triplet.object})"
        if triplet.attributes:
            line += f" [attributes: {'; '.join(triplet.attributes)}]"
        lines.append(line)
    lines.append(f"Topics: {'; '.join(decomposition.topics)}")
    return "\n".join(lines)


def render_memory_and_history(
    recalled: Sequence[EvidenceRecord],
    steps: Sequence[Step],
    policy: MemoryPolicy,
) -> str:
    lines = ["Memory:"]
    if recalled:
        for record in recalled:
            lines.append(f'- ({record.tool}: "{record.query}") {record.content}')
    else:
        lines.append("- (none)")
    if policy is MemoryPolicy.FIRST:
        lines.append(MEMORY_FIRST_DIRECTIVE)
    lines.append("Previous steps:")
    if steps:
        for index, step in enumerate(steps, start=1):
            lines.append(f"Step {index}:")
            lines.append(f"Thought: {step.thought}")
            if isinstance(step.action, ToolCall):
                lines.append(
                    f'Action: {{"name": "{step.action.tool}", '
                    f'"reason": "{step.action.reason}", '
                    f'"input": "{step.action.input}"}}'
                )
                lines.append(f"Observation: {step.observation}")
            else:
                lines.append(f"Action: answer {step.action.label.value}")
    else:
        lines.append("- (none)")
    return "\n".join(lines)


def render_tools(gateway: ToolGateway | None) -> str:
    if gateway is None:
        return "(none)"
    lines = [f"- {spec.name}: {spec.description}" for spec in gateway.list_tools()]
    return "\n" + "\n".join(lines) if lines else "(none)"


def render_context(
    claim: Claim,
    decomposition: Decomposition,
    recalled: Sequence[EvidenceRecord],
    steps: Sequence[Step],
    gateway: ToolGateway | None,
    policy: MemoryPolicy,
    step_index: int,
    t_max: int,
) -> tuple[str, str]:
    """Render the loop prompt: (system message, user message)."""
    system, _, body = _EXECUTOR_TEMPLATE.partition("\n\n")
    body = (
        body.replace("{query}", claim.text)
        .replace("{background}", render_background(decomposition))
        .replace("{history}", render_memory_and_history(recalled, steps, policy))
        .replace("{tools}", render_tools(gateway))
    )
    body += f"\n\nCurrent step: {step_index} of {t_max}"
    return system.strip(), body.strip()


def _complete_with_reprompt(
    provider: Provider, messages: list[ChatMessage]
) -> tuple[AgentOutput, int]:
    """One provider call, plus one corrective re-prompt on a parse failure."""
    raw = provider.complete(messages)
    try:
        return parse_agent_output(raw), 1
    except AgentParseError:
        retry = messages + [
            ChatMessage("assistant", raw or "(empty)"),
            ChatMessage("user", CORRECTIVE_REPROMPT),
        ]
        raw = provider.complete(retry)
        try:
            return parse_agent_output(raw), 2
        except AgentParseError as exc:
            raise ExecutorParseError(
                f"two consecutive unparseable outputs: {exc}"
            ) from exc


def force_answer(
    claim: Claim,
    decomposition: Decomposition,
    recalled: Sequence[EvidenceRecord],
    trajectory: Trajectory,
    gateway: ToolGateway | None,
    policy: MemoryPolicy,
    provider: Provider,
    t_max: int,
) -> tuple[Verdict, Step, int]:
    """Elicit a terminal judgment after the step budget ran out.

    One retry; if no parseable answer emerges the verdict fails closed
    to FALSE. Returns the verdict, the terminal step, and the number of
    provider calls spent.
    """
    system, body = render_context(
        claim, decomposition, recalled, trajectory.steps, gateway, policy,
        t_max + 1, t_max,
    )
    messages = [
        ChatMessage("system", system),
        ChatMessage("user", body + "\n\n" + _FORCE_TEMPLATE.strip()),
    ]
    calls = 0
    for _ in range(2):
        raw = provider.complete(messages)
        calls += 1
        try:
            output = parse_agent_output(raw)
        except AgentParseError:
            output = None
        if output is not None and isinstance(output.action, Answer):
            verdict = Verdict(output.action.label, output.thought, claim.id)
            return verdict, Step(output.thought, output.action), calls
        messages = messages + [
            ChatMessage("assistant", raw or "(empty)"),
            ChatMessage("user", FORCE_RETRY_REPROMPT),
        ]
    verdict = Verdict(VeracityLabel.FALSE, FORCED_DEFAULT_RATIONALE, claim.id)
    return verdict, Step(FORCED_DEFAULT_RATIONALE, Answer(VeracityLabel.FALSE)), calls


def _find_previous_observation(
    steps: Sequence[Step], tool: str, input_text: str
) -> str | None:
    for step in steps:
        if (
            isinstance(step.action, ToolCall)
            and step.action.tool == tool
            and step.action.input == input_text
        ):
            return step.observation
    return None


def verify(
    claim: Claim,
    decomposition: Decomposition,
    store: MemoryStore | None,
    gateway: ToolGateway | None,
    provider: Provider,
    policy: MemoryPolicy = MemoryPolicy.ON,
    t_max: int = DEFAULT_T_MAX,
    counter: CallCounter | None = None,
    clock: Callable[[], datetime] = utc_now_second,
) -> VerifyOutcome:
    """Run the verification loop for one claim.

    Memory is recalled once at initialization and held fixed for the
    session. The returned delta holds every non-empty tool-call
    observation as an evidence record (truncated for write-back); the
    caller decides whether to commit it to the store.
    """
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    counter = counter if counter is not None else CallCounter()

    entity_keys = entities_of(decomposition)
    if policy is MemoryPolicy.OFF or store is None:
        recalled: list[EvidenceRecord] = []
    else:
        recalled = store.recall(entity_keys)

    trajectory = Trajectory(claim_id=claim.id)
    verdict: Verdict | None = None
    forced = False
    provider_calls = 0

    for step_index in range(1, t_max + 1):
        system, body = render_context(
            claim, decomposition, recalled, trajectory.steps, gateway, policy,
            step_index, t_max,
        )
        messages = [ChatMessage("system", system), ChatMessage("user", body)]
        output, calls = _complete_with_reprompt(provider, messages)
        provider_calls += calls

        if isinstance(output.action, Answer):
            verdict = Verdict(output.action.label, output.thought, claim.id)
            trajectory = trajectory.with_step(Step(output.thought, output.action))
            break

        tool_call = output.action
        counter.record_issued(tool_call.tool)
        previous = _find_previous_observation(
            trajectory.steps, tool_call.tool, tool_call.input
        )
        if policy is MemoryPolicy.ONLY:
            observation = TOOLS_UNAVAILABLE_NOTE
        elif previous is not None:
            observation = f"{DUPLICATE_PREFIX} {previous}"
        elif gateway is None:
            raise ValueError("no tool gateway connected and memory policy is not 'only'")
        else:
            try:
                result = gateway.invoke(tool_call.tool, tool_call.input)
                observation = result.content
                if not result.is_error:
                    counter.record_succeeded(tool_call.tool)
            except ToolNotFound:
                observation = unknown_tool_observation(
                    tool_call.tool, gateway.tool_names()
                )
        trajectory = trajectory.with_step(
            Step(output.thought, tool_call, observation)
        )

    if verdict is None:
        verdict, final_step, calls = force_answer(
            claim, decomposition, recalled, trajectory, gateway, policy,
            provider, t_max,
        )
        provider_calls += calls
        trajectory = trajectory.with_step(final_step)
        forced = True

    trajectory = trajectory.with_outcome(verdict, forced)

    delta = tuple(
        EvidenceRecord(
            content=step.observation[:EVIDENCE_MAX_CHARS],
            tool=step.action.tool,
            query=step.action.input,
            timestamp=clock(),
            claim_id=claim.id,
        )
        for step in trajectory.steps
        if isinstance(step.action, ToolCall) and step.observation
    )
    return VerifyOutcome(
        verdict=verdict,
        trajectory=trajectory,
        delta=delta,
        recalled=tuple(recalled),
        provider_calls=provider_calls,
    )
