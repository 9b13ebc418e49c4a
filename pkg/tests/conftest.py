from pathlib import Path

import numpy as np
from PIL import Image

import coimg
from coimg.manifest import DatasetManifest, ImageEntry


def class_image(class_seed: int, index: int, size: tuple[int, int] = (32, 32)) -> np.ndarray:
    """Deterministic distinct test image: a gradient keyed by (class, index)."""
    w, h = size
    yy, xx = np.mgrid[0:h, 0:w]
    base = (xx * 5 + yy * 3 + index * 17 + class_seed * 41) % 256
    img = np.stack([base, (base + 85) % 256, (base + 170) % 256], axis=-1)
    return img.astype(np.uint8)


def write_png(path: Path, pixels: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(pixels, mode="RGB").save(path, format="PNG")


def make_corpus(
    root: Path, sizes: dict[str, int], image_size: tuple[int, int] = (32, 32)
) -> Path:
    """Directory-per-class corpus of deterministic gradient PNGs."""
    for class_idx, (name, count) in enumerate(sorted(sizes.items())):
        for i in range(count):
            write_png(root / name / f"{name}_{i:05d}.png", class_image(class_idx, i, image_size))
    return root


def solid(color: tuple[int, int, int], size: tuple[int, int] = (32, 32)) -> np.ndarray:
    w, h = size
    return np.full((h, w, 3), color, dtype=np.uint8)


def fake_manifest(sizes: dict[str, int]) -> DatasetManifest:
    """In-memory manifest with placeholder entries; fine for planning math."""
    classes = []
    for name in sorted(sizes):
        entries = [
            ImageEntry(
                class_name=name,
                index=i,
                relative_path=f"{name}/{name}_{i:05d}.png",
                width=32,
                height=32,
                content_digest=f"{name}-{i:05d}".ljust(64, "0"),
            )
            for i in range(sizes[name])
        ]
        classes.append((name, entries))
    return DatasetManifest(
        root="/nonexistent",
        classes=classes,
        created_at="2026-01-01T00:00:00+00:00",
        tool_version=coimg.__version__,
    )
