"""Readers for the generator's manifest file formats.

Two formats are understood, both consumed as plain files (the harness never
imports the generator):

* dataset manifest: one JSON document with an ``entries`` array
  (fields: class, index, path, width, height, digest),
* generation manifest: JSON lines, a ``type: header`` line followed by one
  composite record per line (class, rank, members, epoch, path, digest).

Each record carries the source-image identities behind it so folds can be
made group-aware: an original image is its own source; a composite's sources
are its member images.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class EvalRecord:
    record_id: str
    class_name: str
    path: str
    source_ids: tuple[str, ...]


def _load_dataset_manifest(doc: dict, manifest_path: Path) -> list[EvalRecord]:
    root = Path(doc["root"])
    if not root.is_absolute():
        root = (manifest_path.parent / root).resolve()
    records = []
    for entry in doc["entries"]:
        rel = entry["path"]
        records.append(
            EvalRecord(
                record_id=rel,
                class_name=entry["class"],
                path=str(root / rel),
                source_ids=(f"{entry['class']}:{entry['index']}",),
            )
        )
    return records


def _load_generation_manifest(lines: list[dict], manifest_path: Path) -> list[EvalRecord]:
    header = lines[0]
    out_root = Path(header["config"]["output_root"])
    if not out_root.is_absolute():
        out_root = (manifest_path.parent / out_root).resolve()
    records = []
    for rec in lines[1:]:
        records.append(
            EvalRecord(
                record_id=rec["path"],
                class_name=rec["class"],
                path=str(out_root / rec["path"]),
                source_ids=tuple(f"{rec['class']}:{m}" for m in rec["members"]),
            )
        )
    return records


def load_records(path: str | Path) -> list[EvalRecord]:
    """Load either manifest format into a flat record list."""
    path = Path(path)
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        lines = [json.loads(l) for l in text.splitlines() if l.strip()]
        if not lines or lines[0].get("type") != "header":
            raise ValueError(f"{path}: JSON lines input is missing the header line")
        return _load_generation_manifest(lines, path)
    if isinstance(doc, dict) and doc.get("type") == "header":
        return []  # header-only generation manifest: zero records
    if isinstance(doc, dict) and "entries" in doc:
        return _load_dataset_manifest(doc, path)
    raise ValueError(f"{path}: not a dataset or generation manifest")
