"""Scan a directory-per-class image corpus into a stable, ordered inventory.

Class identity is the immediate subdirectory name; files inside a class are
traversed recursively.  Entries are ordered by byte-wise lexicographic
relative path, which pins down combination semantics machine-independently.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator

import coimg
from coimg.errors import DecodeFailure, EmptyDataset
from coimg.imaging import decode_image, pixel_digest

logger = logging.getLogger(__name__)

DEFAULT_EXTENSIONS = frozenset(
    {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".tif", ".tiff", ".webp"}
)


@dataclass(frozen=True)
class ImageEntry:
    """One source image: class-local index plus decoded geometry and digest."""

    class_name: str
    index: int
    relative_path: str
    width: int
    height: int
    content_digest: str


@dataclass(frozen=True)
class UnreadableFile:
    """A file that matched an image extension but failed to decode."""

    path: str
    reason: str


@dataclass
class DatasetManifest:
    """Ordered inventory of a scanned corpus.

    ``classes`` holds (class_name, entries) pairs in ascending lexicographic
    class order; entry indices are contiguous from 0 within each class.
    ``unreadable`` is the scan-time report of skipped files; it is not part
    of the serialized document.
    """

    root: str
    classes: list[tuple[str, list[ImageEntry]]]
    created_at: str
    tool_version: str
    unreadable: tuple[UnreadableFile, ...] = field(default=(), compare=False)

    def class_names(self) -> list[str]:
        return [name for name, _ in self.classes]

    def entries(self, class_name: str) -> list[ImageEntry]:
        for name, entries in self.classes:
            if name == class_name:
                return entries
        raise KeyError(class_name)

    def class_sizes(self) -> dict[str, int]:
        return {name: len(entries) for name, entries in self.classes}

    def total_images(self) -> int:
        return sum(len(entries) for _, entries in self.classes)

    def iter_entries(self) -> Iterator[ImageEntry]:
        for _, entries in self.classes:
            yield from entries

    def to_json_dict(self) -> dict:
        return {
            "root": self.root,
            "created_at": self.created_at,
            "tool_version": self.tool_version,
            "classes": self.class_names(),
            "entries": [
                {
                    "class": e.class_name,
                    "index": e.index,
                    "path": e.relative_path,
                    "width": e.width,
                    "height": e.height,
                    "digest": e.content_digest,
                }
                for e in self.iter_entries()
            ],
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":")) + "\n"
        )

    @classmethod
    def from_json_dict(cls, doc: dict) -> "DatasetManifest":
        by_class: dict[str, list[ImageEntry]] = {name: [] for name in doc.get("classes", [])}
        for rec in doc["entries"]:
            entry = ImageEntry(
                class_name=rec["class"],
                index=rec["index"],
                relative_path=rec["path"],
                width=rec["width"],
                height=rec["height"],
                content_digest=rec["digest"],
            )
            by_class.setdefault(entry.class_name, []).append(entry)
        classes = [(name, by_class[name]) for name in sorted(by_class)]
        for name, entries in classes:
            for i, entry in enumerate(entries):
                if entry.index != i:
                    raise ValueError(f"class {name}: entry indices not contiguous")
        return cls(
            root=doc["root"],
            classes=classes,
            created_at=doc["created_at"],
            tool_version=doc["tool_version"],
        )

    @classmethod
    def read(cls, path: str | Path) -> "DatasetManifest":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def scan_dataset(
    root: str | Path, extensions: frozenset[str] | set[str] | None = None
) -> DatasetManifest:
    """Scan ``root`` (one subdirectory per class) into a manifest.

    Files that match an extension but fail to decode are reported on the
    returned manifest's ``unreadable`` tuple and excluded; the scan continues.
    Raises :class:`EmptyDataset` when no class yields a single decodable image.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root {root} is not a directory")
    suffixes = {s.lower() for s in (extensions or DEFAULT_EXTENSIONS)}

    classes: list[tuple[str, list[ImageEntry]]] = []
    unreadable: list[UnreadableFile] = []
    for class_dir in sorted((d for d in root.iterdir() if d.is_dir()), key=lambda d: d.name):
        files = sorted(
            (
                p
                for p in class_dir.rglob("*")
                if p.is_file() and p.suffix.lower() in suffixes
            ),
            key=lambda p: p.relative_to(root).as_posix(),
        )
        entries: list[ImageEntry] = []
        for path in files:
            rel = path.relative_to(root).as_posix()
            try:
                pixels = decode_image(path)
            except DecodeFailure as exc:
                logger.warning("unreadable image skipped: %s", exc)
                unreadable.append(UnreadableFile(path=rel, reason=str(exc)))
                continue
            entries.append(
                ImageEntry(
                    class_name=class_dir.name,
                    index=len(entries),
                    relative_path=rel,
                    width=pixels.shape[1],
                    height=pixels.shape[0],
                    content_digest=pixel_digest(pixels),
                )
            )
        classes.append((class_dir.name, entries))

    if not any(entries for _, entries in classes):
        raise EmptyDataset(f"no decodable images under {root}")
    return DatasetManifest(
        root=str(root),
        classes=classes,
        created_at=datetime.now(timezone.utc).isoformat(),
        tool_version=coimg.__version__,
        unreadable=tuple(unreadable),
    )


@dataclass(frozen=True)
class ClassStat:
    class_name: str
    count: int
    fraction: float


def class_stats(manifest: DatasetManifest) -> list[ClassStat]:
    """Per-class counts and fractions of the total image count."""
    total = manifest.total_images()
    if total == 0:
        raise EmptyDataset("manifest lists no images")
    return [
        ClassStat(class_name=name, count=len(entries), fraction=len(entries) / total)
        for name, entries in manifest.classes
    ]
