"""Render grid composites from same-class member images.

Slot s of a rows x cols grid (row-major, so slot s sits at row s // cols,
column s % cols) shows member s after its per-slot transform chain:
contrast about mid-gray, rotation about the center, whole-pixel translation,
then aspect-preserving letterboxing into the cell.  The whole chain runs in
float64 and is quantized once at the end, so a record's pixel digest is a
pure function of (source digests, layout, transforms).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from PIL import Image

from coimg.errors import MemberCountMismatch, WriteFailure
from coimg.imaging import (
    adjust_contrast,
    decode_image,
    letterbox,
    pixel_digest,
    quantize,
    rotate_bilinear,
    translate,
)
from coimg.manifest import DatasetManifest
from coimg.rng import SplitMix64, record_seed

LOSSLESS_FORMATS = {"png": "PNG", "bmp": "BMP"}

TRANSLATION_LIMIT_PX = 2
CONTRAST_RANGE = (0.9, 1.1)


@dataclass(frozen=True)
class Layout:
    """Grid shape and cell geometry; a composite holds k = rows * cols tiles."""

    rows: int
    cols: int
    cell_width: int = 224
    cell_height: int = 224

    def __post_init__(self) -> None:
        if min(self.rows, self.cols, self.cell_width, self.cell_height) < 1:
            raise ValueError("layout dimensions must be positive")

    @property
    def k(self) -> int:
        return self.rows * self.cols

    @property
    def out_width(self) -> int:
        return self.cols * self.cell_width

    @property
    def out_height(self) -> int:
        return self.rows * self.cell_height

    def to_json_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "cell_width": self.cell_width,
            "cell_height": self.cell_height,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Layout":
        return cls(doc["rows"], doc["cols"], doc["cell_width"], doc["cell_height"])


@dataclass(frozen=True)
class SlotTransform:
    """Per-slot augmentation parameters; identity unless stated otherwise."""

    rotation_degrees: float = 0.0
    translate_x: int = 0
    translate_y: int = 0
    contrast_scale: float = 1.0

    def to_json_dict(self) -> dict:
        return {
            "rot": self.rotation_degrees,
            "dx": self.translate_x,
            "dy": self.translate_y,
            "contrast": self.contrast_scale,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SlotTransform":
        return cls(doc["rot"], doc["dx"], doc["dy"], doc["contrast"])


@dataclass(frozen=True)
class CompositeRecord:
    """One planned composite: who goes in, how each slot is perturbed, where it lands."""

    class_name: str
    rank: int
    member_indices: tuple[int, ...]
    slot_transforms: tuple[SlotTransform, ...]
    augmentation_epoch: int = 0
    output_path: str = ""

    def to_json_dict(self) -> dict:
        return {
            "class": self.class_name,
            "rank": self.rank,
            "members": list(self.member_indices),
            "epoch": self.augmentation_epoch,
            "transforms": [t.to_json_dict() for t in self.slot_transforms],
            "path": self.output_path,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "CompositeRecord":
        return cls(
            class_name=doc["class"],
            rank=doc["rank"],
            member_indices=tuple(doc["members"]),
            slot_transforms=tuple(SlotTransform.from_json_dict(t) for t in doc["transforms"]),
            augmentation_epoch=doc["epoch"],
            output_path=doc["path"],
        )


def record_output_path(class_name: str, rank: int, epoch: int, image_format: str) -> str:
    """<class>/<class>_<rank padded to 10 digits>[_e<epoch>].<ext>"""
    suffix = f"_e{epoch}" if epoch > 0 else ""
    return f"{class_name}/{class_name}_{rank:010d}{suffix}.{image_format}"


def derive_slot_transforms(
    seed: int, key: tuple[str, int, int], k: int, max_rot: float
) -> tuple[SlotTransform, ...]:
    """Deterministic per-slot transforms for record ``key`` = (class, rank, epoch).

    Rotations are uniform in [-max_rot, +max_rot].  Epochs above 0 (reuse of
    an already-emitted combination) additionally draw a translation in
    [-2, +2] px per axis and a contrast scale in [0.9, 1.1], so repeats are
    never pixel-identical.  Draw order per slot: rotation, dx, dy, contrast.
    """
    if max_rot < 0:
        raise ValueError("max_rot must be non-negative")
    class_name, rank, epoch = key
    rng = SplitMix64(record_seed(seed, class_name, rank, epoch))
    transforms = []
    for _ in range(k):
        rot = rng.uniform(-max_rot, max_rot) if max_rot > 0 else 0.0
        if epoch > 0:
            dx = rng.next_int_range(-TRANSLATION_LIMIT_PX, TRANSLATION_LIMIT_PX)
            dy = rng.next_int_range(-TRANSLATION_LIMIT_PX, TRANSLATION_LIMIT_PX)
            contrast = rng.uniform(*CONTRAST_RANGE)
        else:
            dx = dy = 0
            contrast = 1.0
        transforms.append(
            SlotTransform(
                rotation_degrees=rot, translate_x=dx, translate_y=dy, contrast_scale=contrast
            )
        )
    return tuple(transforms)


def create_coimg(
    members: list[np.ndarray], layout: Layout, transforms: list[SlotTransform]
) -> np.ndarray:
    """Compose k transformed member images into one RGB uint8 grid image."""
    if len(members) != layout.k:
        raise MemberCountMismatch(f"expected {layout.k} members, got {len(members)}")
    if len(transforms) != layout.k:
        raise MemberCountMismatch(f"expected {layout.k} transforms, got {len(transforms)}")
    canvas = np.zeros((layout.out_height, layout.out_width, 3), dtype=np.float64)
    for slot, (member, t) in enumerate(zip(members, transforms)):
        tile = member.astype(np.float64)
        tile = adjust_contrast(tile, t.contrast_scale)
        tile = rotate_bilinear(tile, t.rotation_degrees)
        tile = translate(tile, t.translate_x, t.translate_y)
        cell = letterbox(tile, layout.cell_width, layout.cell_height)
        row, col = divmod(slot, layout.cols)
        canvas[
            row * layout.cell_height : (row + 1) * layout.cell_height,
            col * layout.cell_width : (col + 1) * layout.cell_width,
        ] = cell
    return quantize(canvas)


@lru_cache(maxsize=4096)
def _decode_cached(path: str) -> np.ndarray:
    pixels = decode_image(path)
    pixels.setflags(write=False)
    return pixels


@dataclass(frozen=True)
class RenderResult:
    output_path: str
    digest: str
    width: int
    height: int


def render_record(
    record: CompositeRecord, manifest: DatasetManifest, layout: Layout
) -> np.ndarray:
    """Render a record's composite in memory from its source images."""
    root = Path(manifest.root)
    entries = manifest.entries(record.class_name)
    members = [_decode_cached(str(root / entries[i].relative_path)) for i in record.member_indices]
    return create_coimg(members, layout, list(record.slot_transforms))


def render_and_encode(
    record: CompositeRecord,
    manifest: DatasetManifest,
    layout: Layout,
    output_root: str | Path,
    image_format: str = "png",
) -> RenderResult:
    """Render one record to disk; the digest covers the pre-encoding pixels."""
    pil_format = LOSSLESS_FORMATS.get(image_format)
    if pil_format is None:
        raise ValueError(f"unsupported image format {image_format!r}")
    composite = render_record(record, manifest, layout)
    digest = pixel_digest(composite)
    target = Path(output_root) / record.output_path
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(composite, mode="RGB").save(target, format=pil_format)
    except OSError as exc:
        raise WriteFailure(f"{target}: {exc}") from exc
    return RenderResult(
        output_path=record.output_path,
        digest=digest,
        width=composite.shape[1],
        height=composite.shape[0],
    )
