"""Entity-keyed evidence store shared across claims.

Recall-then-update protocol: before a verification session the store is
queried with the claim's entity keys; after the session every retrieval
observation is written back under all of those keys. Matching is exact
string match on normalized keys, nothing semantic. A per-key cap with
FIFO eviction bounds how much evidence one keyword can accumulate.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Iterable, Sequence

from .models import EvidenceRecord, normalize_entity

DEFAULT_PER_KEY_CAP = 20

# Write-back truncation for a single observation. Anything longer is cut,
# not dropped: partial evidence still beats a repeated search.
EVIDENCE_MAX_CHARS = 2000


class FormatError(Exception):
    """Backing file is corrupt or empty; loading fails loudly."""


class MemoryStore:
    """Map from normalized entity key to an ordered list of evidence records."""

    def __init__(
        self,
        per_key_cap: int = DEFAULT_PER_KEY_CAP,
        backing_path: str | Path | None = None,
    ):
        if per_key_cap < 1:
            raise ValueError("per_key_cap must be positive")
        self.per_key_cap = per_key_cap
        self.backing_path = Path(backing_path) if backing_path else None
        self._entries: dict[str, list[EvidenceRecord]] = {}

    @property
    def key_count(self) -> int:
        return len(self._entries)

    @property
    def record_count(self) -> int:
        return sum(len(records) for records in self._entries.values())

    def keys(self) -> list[str]:
        return list(self._entries)

    def records_for(self, key: str) -> list[EvidenceRecord]:
        return list(self._entries.get(normalize_entity(key), ()))

    def recall(self, entity_keys: Sequence[str]) -> list[EvidenceRecord]:
        """Evidence under the given keys, deduplicated by (content, tool, query).

        Key order first, insertion order second; unknown keys are a miss,
        not an error.
        """
        found: list[EvidenceRecord] = []
        seen: set[tuple[str, str, str]] = set()
        for key in entity_keys:
            for record in self._entries.get(normalize_entity(key), ()):
                identity = record.identity()
                if identity not in seen:
                    seen.add(identity)
                    found.append(record)
        return found

    def update(self, entity_keys: Sequence[str], delta: Iterable[EvidenceRecord]) -> None:
        """Append each delta record under every entity key.

        Duplicates (same content, tool, query under one key) are skipped;
        when a key's list grows past the cap, oldest records are evicted.
        """
        delta = list(delta)
        if not delta:
            return
        for key in entity_keys:
            normalized = normalize_entity(key)
            if not normalized:
                continue
            bucket = self._entries.setdefault(normalized, [])
            present = {record.identity() for record in bucket}
            for record in delta:
                identity = record.identity()
                if identity in present:
                    continue
                present.add(identity)
                bucket.append(record)
            while len(bucket) > self.per_key_cap:
                evicted = bucket.pop(0)
                present.discard(evicted.identity())

    def snapshot(self) -> dict[str, list[tuple[str, str, str]]]:
        """Per-key record identities in order; used for semantic equality."""
        return {
            key: [record.identity() for record in records]
            for key, records in self._entries.items()
        }

    def persist(self, path: str | Path | None = None) -> Path:
        """Write the store to its backing file (write-temp-then-rename)."""
        target = Path(path) if path else self.backing_path
        if target is None:
            raise ValueError("no backing path configured")
        payload = {
            key: [record.to_dict() for record in records]
            for key, records in sorted(self._entries.items())
        }
        temp = target.with_name(target.name + ".tmp")
        temp.write_text(
            json.dumps(payload, ensure_ascii=False, indent=2), encoding="utf-8"
        )
        os.replace(temp, target)
        return target

    @classmethod
    def load(
        cls,
        path: str | Path,
        per_key_cap: int = DEFAULT_PER_KEY_CAP,
    ) -> "MemoryStore":
        """Load a store from disk. Corrupt files raise FormatError, loudly."""
        text = Path(path).read_text(encoding="utf-8")
        if not text.strip():
            raise FormatError(f"memory file is empty: {path}")
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"memory file is not valid JSON: {path}: {exc}") from exc
        if not isinstance(payload, dict):
            raise FormatError(f"memory file must hold a key-to-records object: {path}")
        store = cls(per_key_cap=per_key_cap, backing_path=path)
        for key, records in payload.items():
            if not isinstance(records, list):
                raise FormatError(f"records under key {key!r} must be a list: {path}")
            try:
                bucket = [EvidenceRecord.from_dict(item) for item in records]
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(
                    f"bad evidence record under key {key!r}: {path}: {exc}"
                ) from exc
            store._entries[normalize_entity(key)] = bucket[-per_key_cap:]
        return store
