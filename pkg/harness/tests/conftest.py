import subprocess
import sys
from pathlib import Path

import numpy as np
from PIL import Image

CLASS_COLORS = {"bluc": (40, 40, 200), "grnc": (40, 200, 40), "redc": (200, 40, 40)}


def make_separable_corpus(root: Path, per_class: int, size: int = 16, seed: int = 0) -> Path:
    """Three color-coded classes with mild noise; trivially separable."""
    rng = np.random.default_rng(seed)
    for name, mean in sorted(CLASS_COLORS.items()):
        class_dir = root / name
        class_dir.mkdir(parents=True, exist_ok=True)
        for i in range(per_class):
            noise = rng.normal(0.0, 12.0, (size, size, 3))
            pixels = np.clip(np.asarray(mean, dtype=np.float64) + noise, 0, 255)
            Image.fromarray(pixels.astype(np.uint8), mode="RGB").save(
                class_dir / f"{name}_{i:04d}.png", format="PNG"
            )
    return root


def run_coimg(*args: str) -> subprocess.CompletedProcess:
    """Drive the generator through its CLI; the harness never imports it."""
    result = subprocess.run(
        [sys.executable, "-m", "coimg", *map(str, args)],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, f"coimg {args[0]} failed:\n{result.stderr}"
    return result


def generate_composites(
    tmp_path: Path, per_class: int = 300, disjoint: bool = True, seed: int = 7
) -> tuple[Path, Path]:
    """Scan + plan + generate; returns (dataset manifest, generation manifest)."""
    src = make_separable_corpus(tmp_path / "src", per_class)
    manifest = tmp_path / "manifest.json"
    plan = tmp_path / "plan.json"
    out_root = tmp_path / "out"
    run_coimg("scan", "--root", src, "--out", manifest)
    plan_args = [
        "plan", "--manifest", manifest, "--rows", "3", "--cols", "1",
        "--cell-width", "16", "--cell-height", "16", "--seed", str(seed),
        "--output-root", out_root, "--out", plan,
    ]
    if disjoint:
        plan_args.append("--disjoint")
    run_coimg(*plan_args)
    run_coimg("generate", "--plan", plan)
    return manifest, out_root / "generation_manifest.jsonl"
