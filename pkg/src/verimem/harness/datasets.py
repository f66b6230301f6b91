"""Dataset ingestion and stratified sampling.

Datasets are JSON lines of {"id", "claim", "label"} plus an optional
"tag" (or "hops") field. Native labels map to the binary scheme at
ingestion so everything downstream is label-scheme agnostic. File order
is preserved: memory reuse across claims is order-sensitive.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from ..models import Claim, VeracityLabel

SCHEMES: dict[str, dict[str, VeracityLabel]] = {
    "true_false": {"true": VeracityLabel.TRUE, "false": VeracityLabel.FALSE},
    "supported_refuted": {
        "supported": VeracityLabel.TRUE,
        "refuted": VeracityLabel.FALSE,
    },
}


class SchemaError(Exception):
    """A dataset line is malformed; the message names the line."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


@dataclass(frozen=True, slots=True)
class DatasetRecord:
    id: str
    claim: str
    gold: VeracityLabel
    raw_label: str
    tag: str | None = None

    def to_claim(self, dataset: str) -> Claim:
        return Claim(id=self.id, text=self.claim, gold_label=self.gold, dataset=dataset)


def load_dataset(path: str | Path, scheme: str) -> list[DatasetRecord]:
    """Parse a JSONL dataset, mapping native labels per ``scheme``.

    Records whose labels fall outside the scheme are rejected with a
    SchemaError naming the line, as are lines missing id/claim/label.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {sorted(SCHEMES)}")
    mapping = SCHEMES[scheme]
    records: list[DatasetRecord] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(line_no, f"invalid JSON: {exc}") from exc
            if not isinstance(row, dict):
                raise SchemaError(line_no, "record must be a JSON object")
            for key in ("id", "claim", "label"):
                if key not in row or row[key] in (None, ""):
                    raise SchemaError(line_no, f"missing field {key!r}")
            raw_label = str(row["label"])
            gold = mapping.get(raw_label.strip().lower())
            if gold is None:
                raise SchemaError(
                    line_no,
                    f"label {raw_label!r} not in scheme {scheme!r}",
                )
            record_id = str(row["id"])
            if record_id in seen_ids:
                raise SchemaError(line_no, f"duplicate id {record_id!r}")
            seen_ids.add(record_id)
            tag = row.get("tag")
            if tag is None and "hops" in row:
                tag = str(row["hops"])
            records.append(
                DatasetRecord(
                    id=record_id,
                    claim=str(row["claim"]),
                    gold=gold,
                    raw_label=raw_label,
                    tag=tag,
                )
            )
    return records


def stratified_sample(
    records: Sequence[DatasetRecord], size: int, seed: int
) -> list[DatasetRecord]:
    """Sample ``size`` records with a balanced label split, seeded.

    The sample keeps original file order. When ``size`` is odd the extra
    slot goes to the TRUE class.
    """
    if size < 1:
        raise ValueError("sample size must be positive")
    by_label: dict[VeracityLabel, list[int]] = {
        VeracityLabel.TRUE: [],
        VeracityLabel.FALSE: [],
    }
    for index, record in enumerate(records):
        by_label[record.gold].append(index)
    quotas = {
        VeracityLabel.TRUE: size - size // 2,
        VeracityLabel.FALSE: size // 2,
    }
    rng = random.Random(seed)
    chosen: list[int] = []
    for label, quota in quotas.items():
        pool = by_label[label]
        if len(pool) < quota:
            raise ValueError(
                f"not enough {label.value!r} records: need {quota}, have {len(pool)}"
            )
        chosen.extend(rng.sample(pool, quota))
    return [records[index] for index in sorted(chosen)]


def write_dataset(records: Sequence[DatasetRecord], path: str | Path) -> None:
    """Write records back out as JSONL with their native labels."""
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            row: dict[str, object] = {
                "id": record.id,
                "claim": record.claim,
                "label": record.raw_label,
            }
            if record.tag is not None:
                row["tag"] = record.tag
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")
