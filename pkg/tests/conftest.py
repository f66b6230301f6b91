"""Shared test doubles and small builders."""

from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone
from typing import Sequence

import pytest

from verimem.models import EvidenceRecord
from verimem.providers import ChatMessage


def tool_json(name: str, input_text: str, reason: str = "lookup", thought: str = "t") -> str:
    return json.dumps(
        {"thought": thought, "action": {"name": name, "reason": reason, "input": input_text}}
    )


def answer_json(label: str, thought: str = "t") -> str:
    return json.dumps({"thought": thought, "answer": label})


def decomposition_json(
    subject: str, relation: str, obj: str, topics: Sequence[str]
) -> str:
    return json.dumps(
        {
            "triplets": [
                {"subject": subject, "relation": relation, "object": obj, "attributes": []}
            ],
            "topics": list(topics),
        }
    )


def make_evidence(
    content: str,
    tool: str = "search_google",
    query: str = "q",
    claim_id: str = "c1",
    offset_s: int = 0,
) -> EvidenceRecord:
    base = datetime(2026, 8, 8, 12, 0, 0, tzinfo=timezone.utc)
    return EvidenceRecord(
        content=content,
        tool=tool,
        query=query,
        timestamp=base + timedelta(seconds=offset_s),
        claim_id=claim_id,
    )


class FactAwareProvider:
    """Deterministic double that reads the rendered prompt like a model would.

    For decomposition prompts it returns the canned decomposition of the
    claim found in the prompt. For loop prompts it answers as soon as the
    claim's fact marker is visible (recalled memory or an observation in
    the history); otherwise it issues the claim's canned search query.
    """

    def __init__(self, playbook: dict[str, dict]):
        self.playbook = playbook
        self.calls = 0

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        self.calls += 1
        prompt = "\n".join(m.content for m in messages)
        if "knowledge triplet" in prompt:
            for text, spec in self.playbook.items():
                if text in prompt:
                    return spec["decomposition"]
            raise AssertionError(f"no playbook entry for decomposition prompt:\n{prompt}")
        for text, spec in self.playbook.items():
            if f"Query: {text}" in prompt:
                if spec["marker"] in prompt:
                    return answer_json(spec["answer"], thought="fact visible in context")
                return tool_json(
                    spec.get("tool", "search_google"),
                    spec["query"],
                    thought="need external evidence",
                )
        raise AssertionError(f"no playbook entry for executor prompt:\n{prompt}")


def write_jsonl(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")


# Four-claim scenario with entity overlap between claims 1 and 3: the fact
# retrieved for claim 1 answers claim 3, so a memory-on run can skip one
# search. Markers appear only in evidence payloads, never in claim texts or
# queries, so the fact-aware provider reacts to evidence alone.
MEMORY_PLAYBOOK = {
    "Mount Whitney is the highest peak in California.": {
        "decomposition": decomposition_json(
            "Mount Whitney", "is", "the highest peak in California", ["Geography"]
        ),
        "query": "Mount Whitney highest peak California",
        "marker": "14,505 ft",
        "answer": "True",
    },
    "The Nile flows through Egypt.": {
        "decomposition": decomposition_json("The Nile", "flows through", "Egypt", ["Geography"]),
        "query": "Nile river Egypt course",
        "marker": "6,650 km",
        "answer": "True",
    },
    "Mount Whitney stands taller than 4000 meters.": {
        "decomposition": decomposition_json(
            "Mount Whitney", "stands taller than", "4000 meters", ["Geography"]
        ),
        "query": "Mount Whitney height meters",
        "marker": "14,505 ft",
        "answer": "True",
    },
    "Honey never spoils when sealed.": {
        "decomposition": decomposition_json("Honey", "resists", "spoilage", ["Food"]),
        "query": "honey spoilage shelf life",
        "marker": "still edible",
        "answer": "True",
    },
}

MEMORY_FIXTURES = [
    {
        "tool": "search_google",
        "input": "Mount Whitney highest peak California",
        "content": "Mount Whitney is the highest summit in California at 14,505 ft.",
    },
    {
        "tool": "search_google",
        "input": "Nile river Egypt course",
        "content": "The Nile flows north through Egypt for part of its 6,650 km course.",
    },
    {
        "tool": "search_google",
        "input": "Mount Whitney height meters",
        "content": "Mount Whitney measures 4,421 m (14,505 ft).",
    },
    {
        "tool": "search_google",
        "input": "honey spoilage shelf life",
        "content": "Sealed honey from ancient tombs was found still edible.",
    },
]

MEMORY_ROWS = [
    {"id": f"m{i}", "claim": text, "label": "True"}
    for i, text in enumerate(MEMORY_PLAYBOOK, start=1)
]


def run_memory_scenario(tmp_path, memory: str, subdir: str):
    """Run the four-claim scenario under the given memory policy."""
    from verimem.gateway import ReplayGateway
    from verimem.harness import RunConfig, run_batch

    workdir = tmp_path / subdir
    workdir.mkdir()
    dataset = workdir / "claims.jsonl"
    write_jsonl(dataset, MEMORY_ROWS)
    config = RunConfig(
        dataset=dataset,
        memory=memory,
        memory_file=workdir / "memory.json" if memory != "off" else None,
        trace_out=workdir / "trace.jsonl",
        report_out=workdir / "report.json",
        seed=7,
    )
    provider = FactAwareProvider(MEMORY_PLAYBOOK)
    gateway = ReplayGateway(MEMORY_FIXTURES)
    report = run_batch(config, provider=provider, gateway=gateway)
    return report, workdir


@pytest.fixture
def dataset_file(tmp_path):
    def _make(rows, name="claims.jsonl"):
        path = tmp_path / name
        write_jsonl(path, rows)
        return path

    return _make
