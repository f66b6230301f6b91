"""Structured claim analysis: map a raw claim to triplets plus topics.

The prompt lives in ``prompts/decomposer.txt`` as a plain-text asset; its
first block is sent as the system message, the rest as the user message
with the single ``{text}`` slot filled in. Output parsing is strict about
the payload but tolerant of the usual model drift: markdown fences,
surrounding prose, singular/plural key names, topics as one string.
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Any

from .jsontext import first_json_value, strip_fences
from .models import Claim, Decomposition, Triplet
from .providers import ChatMessage, Provider

CLAIM_SLOT = "{text}"

FALLBACK_RELATION = "states"
FALLBACK_TOPIC = "general"

_TRIPLET_KEYS = ("triplets", "triplet", "knowledge_triplets", "knowledge_triplet")
_ATTRIBUTE_KEYS = ("attributes", "attribution", "attributions")
_TOPIC_KEYS = ("topics", "topic")


class DecomposeParseError(Exception):
    """Model output could not be read as a decomposition payload."""


class DecomposeEmptyError(Exception):
    """Payload parsed but carried zero triplets or zero topics."""


def _load_template() -> str:
    return (
        resources.files("verimem.prompts").joinpath("decomposer.txt").read_text("utf-8")
    )


_TEMPLATE = _load_template()


def render_prompt(claim_text: str, template: str = _TEMPLATE) -> tuple[str, str]:
    """Render the decomposition prompt: (system message, user message)."""
    if template.count(CLAIM_SLOT) != 1:
        raise ValueError("template must contain exactly one claim slot")
    system, _, body = template.partition("\n\n")
    return system.strip(), body.replace(CLAIM_SLOT, claim_text).strip()


def _as_text(value: Any) -> str:
    return value.strip() if isinstance(value, str) else ""


def _parse_attributes(value: Any) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        return (value.strip(),) if value.strip() else ()
    if isinstance(value, list):
        return tuple(str(item).strip() for item in value if str(item).strip())
    return ()


def _parse_triplet(item: Any) -> Triplet | None:
    if isinstance(item, list) and 3 <= len(item) <= 4:
        parts = [_as_text(part) for part in item[:3]]
        if all(parts):
            extra = _parse_attributes(item[3]) if len(item) == 4 else ()
            return Triplet(parts[0], parts[1], parts[2], extra)
        return None
    if not isinstance(item, dict):
        return None
    subject = _as_text(item.get("subject"))
    relation = _as_text(item.get("relation"))
    obj = _as_text(item.get("object"))
    if not (subject and relation and obj):
        return None
    attributes: tuple[str, ...] = ()
    for key in _ATTRIBUTE_KEYS:
        if key in item:
            attributes = _parse_attributes(item[key])
            break
    return Triplet(subject, relation, obj, attributes)


def _parse_topics(value: Any) -> tuple[str, ...]:
    if isinstance(value, str):
        parts = [p.strip() for chunk in value.split(";") for p in chunk.split(",")]
        return tuple(p for p in parts if p)
    if isinstance(value, list):
        return tuple(str(item).strip() for item in value if str(item).strip())
    return ()


def parse_decomposition(raw: str) -> Decomposition:
    """Parse a model response into a Decomposition.

    Raises DecomposeParseError when no usable JSON payload is present,
    DecomposeEmptyError when the payload holds zero triplets or topics.
    """
    text = strip_fences(raw)
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        try:
            data = first_json_value(text)
        except ValueError:
            raise DecomposeParseError("response carries no JSON payload") from None

    topics_value: Any = None
    if isinstance(data, list):
        items = data
    elif isinstance(data, dict):
        items = None
        for key in _TRIPLET_KEYS:
            if key in data:
                value = data[key]
                items = value if isinstance(value, list) else [value]
                break
        if items is None:
            # No triplet key: the object itself may be a single triplet.
            items = [data]
        for key in _TOPIC_KEYS:
            if key in data:
                topics_value = data[key]
                break
    else:
        raise DecomposeParseError("JSON payload is not an object or array")

    triplets = tuple(t for t in (_parse_triplet(item) for item in items) if t)
    if not triplets and any(isinstance(i, (dict, list)) for i in items):
        raise DecomposeParseError("no well-formed triplet in payload")
    if not triplets:
        raise DecomposeEmptyError("payload holds zero triplets")

    topics = _parse_topics(topics_value)
    if not topics:
        raise DecomposeEmptyError("payload holds zero topics")
    return Decomposition(triplets=triplets, topics=topics)


def degenerate_decomposition(claim: Claim) -> Decomposition:
    """Fallback used when extraction fails, and for single-agent runs."""
    return Decomposition(
        triplets=(Triplet(claim.text, FALLBACK_RELATION, "", ()),),
        topics=(FALLBACK_TOPIC,),
    )


def decompose(claim: Claim, provider: Provider) -> Decomposition:
    """Decompose a claim via the provider; one retry, then degenerate fallback.

    Provider transport/endpoint errors propagate; only parse failures fall
    back, so a flaky model cannot silently halt a batch.
    """
    system, body = render_prompt(claim.text)
    messages = [ChatMessage("system", system), ChatMessage("user", body)]
    for _ in range(2):
        raw = provider.complete(messages)
        try:
            return parse_decomposition(raw)
        except (DecomposeParseError, DecomposeEmptyError):
            continue
    return degenerate_decomposition(claim)
