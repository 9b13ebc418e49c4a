"""Command-line entry point: scan -> plan -> generate -> verify.

Every command is driven by a JSON config file plus flags (flags win).  The
fully-resolved config is embedded in the plan and generation manifests for
provenance, so downstream steps need only the artifact they consume.

Exit codes: 0 success, 2 validation error, 3 generation error,
4 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from PIL import Image

import coimg
from coimg.balancer import CompositePlan, plan_balanced, plan_unbalanced, summarize
from coimg.combinatorics import sample_distinct_ranks
from coimg.composer import (
    CompositeRecord,
    Layout,
    render_and_encode,
    render_record,
)
from coimg.errors import CoimgError, DecodeFailure, VerificationFailed, WriteFailure
from coimg.imaging import decode_image, pixel_digest
from coimg.manifest import DatasetManifest, class_stats, scan_dataset
from coimg.rng import fnv1a64, mix64
from coimg.selection import SelectionPolicy

logger = logging.getLogger("coimg")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_GENERATION = 3
EXIT_VERIFICATION = 4

GENERATION_MANIFEST_NAME = "generation_manifest.jsonl"

DEFAULT_SPOT_CHECKS = 100


@dataclass
class GenerationConfig:
    """Single source of determinism for a full pipeline run."""

    input_root: str | None = None
    output_root: str | None = None
    rows: int = 3
    cols: int = 1
    cell_width: int = 224
    cell_height: int = 224
    policy: str = "class_based"
    high_fraction: float | None = None
    with_repetition: bool = False
    seed: int | None = None
    max_rotation_degrees: float = 3.0
    image_format: str = "png"
    override_target: int | None = None
    per_class_cap: int | None = None
    disjoint: bool = False
    generation_limit: int = 1_000_000

    @property
    def k(self) -> int:
        return self.rows * self.cols

    def layout(self) -> Layout:
        return Layout(self.rows, self.cols, self.cell_width, self.cell_height)

    def selection_policy(self) -> SelectionPolicy:
        return SelectionPolicy(
            kind=self.policy,
            high_fraction=self.high_fraction,
            with_repetition=self.with_repetition,
        )

    def to_json_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def load(cls, config_path: str | None, overrides: dict) -> "GenerationConfig":
        """Defaults <- config file <- explicit flags, in that order."""
        values: dict = {}
        if config_path:
            doc = json.loads(Path(config_path).read_text())
            unknown = set(doc) - {f.name for f in dataclasses.fields(cls)}
            if unknown:
                raise ValueError(f"unknown config keys: {sorted(unknown)}")
            values.update(doc)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def _config_overrides(args: argparse.Namespace) -> dict:
    keys = [f.name for f in dataclasses.fields(GenerationConfig)]
    return {k: getattr(args, k, None) for k in keys}


def _print_error(kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


def _format_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines)


# --- scan / stats -----------------------------------------------------------


def cmd_scan(args: argparse.Namespace) -> int:
    started = time.monotonic()
    extensions = None
    if args.extensions:
        extensions = {e if e.startswith(".") else f".{e}" for e in args.extensions.split(",")}
    manifest = scan_dataset(args.root, extensions)
    manifest.write(args.out)
    _print_stats(manifest)
    if manifest.unreadable:
        print(f"warnings: {len(manifest.unreadable)} unreadable file(s) skipped")
        for bad in manifest.unreadable:
            print(f"  unreadable: {bad.path}", file=sys.stderr)
    logger.info(
        "phase=scan root=%s classes=%d images=%d unreadable=%d elapsed=%.2fs",
        args.root, len(manifest.classes), manifest.total_images(),
        len(manifest.unreadable), time.monotonic() - started,
    )
    return EXIT_OK


def _print_stats(manifest: DatasetManifest) -> None:
    stats = class_stats(manifest)
    rows = [[s.class_name, str(s.count), f"{s.fraction:.4f}"] for s in stats]
    rows.append(["total", str(manifest.total_images()), "1.0000"])
    print(_format_table(["class", "images", "fraction"], rows))


def cmd_stats(args: argparse.Namespace) -> int:
    _print_stats(DatasetManifest.read(args.manifest))
    return EXIT_OK


# --- plan -------------------------------------------------------------------


def cmd_plan(args: argparse.Namespace) -> int:
    started = time.monotonic()
    config = GenerationConfig.load(args.config, _config_overrides(args))
    manifest = DatasetManifest.read(args.manifest)
    layout = config.layout()
    policy = config.selection_policy()

    summary = summarize(
        manifest, layout.k, policy.with_repetition, config.disjoint,
        override_target=config.override_target,
    )
    if args.explain:
        rows = [
            [r.class_name, str(r.n_images), str(r.space_size), r.mode, str(r.planned)]
            for r in summary.rows
        ]
        rows.append(
            ["total", str(summary.total_images), str(summary.total_space), "-",
             str(summary.balanced_total)]
        )
        print(_format_table(["class", "images", "combinations", "mode", "planned"], rows))
        print(f"target T = {summary.target}")
        print(f"balanced total = {summary.balanced_total}")

    if args.out is None:
        if not args.explain:
            raise ValueError("plan needs --out, --explain, or both")
        logger.info("phase=plan explain-only elapsed=%.2fs", time.monotonic() - started)
        return EXIT_OK

    if config.seed is None:
        raise ValueError("plan requires a seed (config key 'seed' or --seed)")
    common = dict(
        max_rotation_degrees=config.max_rotation_degrees,
        image_format=config.image_format,
        disjoint=config.disjoint,
        generation_limit=config.generation_limit,
        sim_cache_dir=args.sim_cache,
        source_manifest=str(args.manifest),
        config=config.to_json_dict(),
    )
    if args.unbalanced:
        plan = plan_unbalanced(
            manifest, layout, policy, config.seed,
            per_class_cap=config.per_class_cap, **common,
        )
    else:
        plan = plan_balanced(
            manifest, layout, policy, config.seed,
            override_target=config.override_target, **common,
        )
    plan.write(args.out)
    logger.info(
        "phase=plan kind=%s classes=%d records=%d target=%s elapsed=%.2fs",
        plan.kind, len(plan.class_plans), plan.total_records(), plan.target,
        time.monotonic() - started,
    )
    return EXIT_OK


# --- generate ---------------------------------------------------------------

_WORKER_CTX: dict = {}


def _worker_init(manifest_path: str, layout_doc: dict, output_root: str, image_format: str) -> None:
    _WORKER_CTX["manifest"] = DatasetManifest.read(manifest_path)
    _WORKER_CTX["layout"] = Layout.from_json_dict(layout_doc)
    _WORKER_CTX["output_root"] = output_root
    _WORKER_CTX["image_format"] = image_format


def _worker_render(record_doc: dict) -> tuple[dict, str | None, int, int, str | None]:
    record = CompositeRecord.from_json_dict(record_doc)
    try:
        result = render_and_encode(
            record,
            _WORKER_CTX["manifest"],
            _WORKER_CTX["layout"],
            _WORKER_CTX["output_root"],
            _WORKER_CTX["image_format"],
        )
        return record_doc, result.digest, result.width, result.height, None
    except (CoimgError, OSError) as exc:
        return record_doc, None, 0, 0, f"{type(exc).__name__}: {exc}"


def _worker_count(args: argparse.Namespace) -> int:
    if getattr(args, "workers", None):
        return max(1, args.workers)
    env = os.environ.get("COIMG_WORKERS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def cmd_generate(args: argparse.Namespace) -> int:
    started = time.monotonic()
    plan = CompositePlan.read(args.plan)
    if plan.config is None:
        raise ValueError("plan file carries no embedded config")
    config = GenerationConfig(**plan.config)
    if args.output_root is not None:
        config.output_root = args.output_root
    if config.output_root is None:
        raise ValueError("generate requires output_root (config key or --output-root)")
    if config.seed is None:
        raise ValueError("generate requires a seed in the plan's config")
    source = args.manifest or plan.source_manifest
    if source is None:
        raise ValueError("generate requires the source manifest path")
    manifest_path = str(Path(source).resolve())
    DatasetManifest.read(manifest_path)  # fail fast on a bad path

    total = plan.total_records()
    if total > config.generation_limit:
        raise CoimgError(
            f"plan holds {total} records, above generation limit {config.generation_limit}"
        )

    out_root = Path(config.output_root)
    out_root.mkdir(parents=True, exist_ok=True)
    workers = _worker_count(args)
    record_docs = [r.to_json_dict() for r in plan.iter_records()]
    layout_doc = plan.layout.to_json_dict()

    logger.info(
        "phase=generate records=%d workers=%d output=%s", total, workers, out_root
    )
    if workers == 1:
        _worker_init(manifest_path, layout_doc, str(out_root), config.image_format)
        results = map(_worker_render, record_docs)
        outcomes = list(results)
    else:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_worker_init,
            initargs=(manifest_path, layout_doc, str(out_root), config.image_format),
        ) as pool:
            chunk = max(1, total // (workers * 8))
            outcomes = list(pool.map(_worker_render, record_docs, chunksize=chunk))

    failures = [(doc["path"], err) for doc, _, _, _, err in outcomes if err]
    header = {
        "type": "header",
        "kind": plan.kind,
        "tool_version": coimg.__version__,
        "target": plan.target,
        "k": plan.k,
        "layout": layout_doc,
        "policy": plan.policy.to_json_dict(),
        "seed": plan.seed,
        "config": config.to_json_dict(),
        "source_manifest": manifest_path,
        "records": total - len(failures),
    }
    gen_manifest = out_root / GENERATION_MANIFEST_NAME
    with open(gen_manifest, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
        for doc, digest, width, height, err in outcomes:
            if err:
                continue
            line = dict(doc)
            line.update({"digest": digest, "width": width, "height": height})
            fh.write(json.dumps(line, sort_keys=True, separators=(",", ":")) + "\n")

    logger.info(
        "phase=generate records=%d failures=%d manifest=%s elapsed=%.2fs",
        total, len(failures), gen_manifest, time.monotonic() - started,
    )
    if failures:
        for path, err in failures:
            print(f"render failed: {path}: {err}", file=sys.stderr)
        _print_error("GenerationFailures", f"{len(failures)} of {total} records failed")
        return EXIT_GENERATION
    return EXIT_OK


# --- verify -----------------------------------------------------------------


def _load_generation_manifest(path: str | Path) -> tuple[dict, list[dict]]:
    header: dict | None = None
    records: list[dict] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            if doc.get("type") == "header":
                header = doc
            else:
                records.append(doc)
    if header is None:
        raise ValueError(f"{path}: missing header line")
    return header, records


def cmd_verify(args: argparse.Namespace) -> int:
    started = time.monotonic()
    header, records = _load_generation_manifest(args.gen_manifest)
    output_root = Path(args.output_root or header["config"]["output_root"])
    layout = Layout.from_json_dict(header["layout"])
    violations: list[str] = []

    # 1. per-class counts hit the balancing target
    counts: dict[str, int] = {}
    for rec in records:
        counts[rec["class"]] = counts.get(rec["class"], 0) + 1
    if header["kind"] == "balanced" and header["target"] is not None:
        for name, count in sorted(counts.items()):
            if count != header["target"]:
                violations.append(
                    f"count: class {name} has {count} records, expected {header['target']}"
                )

    # 2. record distinctness
    seen: set = set()
    for rec in records:
        key = (rec["class"], tuple(rec["members"]), rec["epoch"])
        if key in seen:
            violations.append(f"distinctness: duplicate record {key}")
        seen.add(key)

    # 3. files present with the layout's dimensions
    for rec in records:
        target = output_root / rec["path"]
        if not target.exists():
            violations.append(f"missing-file: {rec['path']}")
            continue
        try:
            with Image.open(target) as im:
                size = im.size
        except Exception as exc:
            violations.append(f"unreadable-output: {rec['path']}: {exc}")
            continue
        if size != (layout.out_width, layout.out_height):
            violations.append(
                f"dimensions: {rec['path']} is {size[0]}x{size[1]}, "
                f"expected {layout.out_width}x{layout.out_height}"
            )

    # 4. digest spot-check by re-render against sources
    spot = args.spot_checks if args.spot_checks is not None else DEFAULT_SPOT_CHECKS
    if records and spot > 0:
        if spot >= len(records):
            picked = list(range(len(records)))
        else:
            check_seed = mix64((header["seed"] or 0) ^ fnv1a64("verify-spot-check"))
            picked = sample_distinct_ranks(len(records), spot, check_seed)
        manifest = DatasetManifest.read(header["source_manifest"])
        for idx in picked:
            rec = records[idx]
            record = CompositeRecord.from_json_dict(rec)
            composite = render_record(record, manifest, layout)
            if pixel_digest(composite) != rec["digest"]:
                violations.append(f"re-render-digest: {rec['path']}")
                continue
            target = output_root / rec["path"]
            if target.exists():
                try:
                    if pixel_digest(decode_image(target)) != rec["digest"]:
                        violations.append(f"file-digest: {rec['path']}")
                except DecodeFailure:
                    pass  # already reported as unreadable-output

    checks = {
        "records": len(records),
        "classes": len(counts),
        "spot_checks": min(spot, len(records)),
        "violations": violations,
    }
    print(json.dumps(checks, sort_keys=True))
    logger.info(
        "phase=verify records=%d violations=%d elapsed=%.2fs",
        len(records), len(violations), time.monotonic() - started,
    )
    if violations:
        raise VerificationFailed(f"{len(violations)} violation(s): " + "; ".join(violations[:5]))
    print("PASS: counts, distinctness, files, dimensions, digests")
    return EXIT_OK


# --- argument parsing -------------------------------------------------------


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--rows", type=int)
    parser.add_argument("--cols", type=int)
    parser.add_argument("--cell-width", dest="cell_width", type=int)
    parser.add_argument("--cell-height", dest="cell_height", type=int)
    parser.add_argument("--policy", choices=[
        "class_based", "similarity_high", "similarity_low", "heterogeneous_mix"])
    parser.add_argument("--high-fraction", dest="high_fraction", type=float)
    parser.add_argument("--with-repetition", dest="with_repetition",
                        action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--max-rotation", dest="max_rotation_degrees", type=float)
    parser.add_argument("--image-format", dest="image_format", choices=["png", "bmp"])
    parser.add_argument("--override-target", dest="override_target", type=int)
    parser.add_argument("--cap", dest="per_class_cap", type=int)
    parser.add_argument("--disjoint", action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--generation-limit", dest="generation_limit", type=int)
    parser.add_argument("--input-root", dest="input_root")
    parser.add_argument("--output-root", dest="output_root")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coimg",
        description="Deterministic class-balanced composite-image dataset generator",
    )
    parser.add_argument("--version", action="version", version=coimg.__version__)
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_scan = sub.add_parser("scan", help="inventory a directory-per-class corpus")
    p_scan.add_argument("--root", required=True)
    p_scan.add_argument("--out", required=True, help="manifest JSON output path")
    p_scan.add_argument("--extensions", help="comma-separated suffixes, e.g. .png,.jpg")
    p_scan.set_defaults(func=cmd_scan)

    p_stats = sub.add_parser("stats", help="per-class statistics from a manifest")
    p_stats.add_argument("--manifest", required=True)
    p_stats.set_defaults(func=cmd_stats)

    p_plan = sub.add_parser("plan", help="plan a balanced (or capped) composite set")
    p_plan.add_argument("--manifest", required=True)
    p_plan.add_argument("--out", help="plan JSON output path")
    p_plan.add_argument("--explain", action="store_true",
                        help="print the per-class combination table")
    p_plan.add_argument("--unbalanced", action="store_true",
                        help="plan min(cap, space) per class instead of balancing")
    p_plan.add_argument("--sim-cache", dest="sim_cache",
                        help="directory for cached similarity matrices")
    _add_config_flags(p_plan)
    p_plan.set_defaults(func=cmd_plan)

    p_gen = sub.add_parser("generate", help="render all planned composites")
    p_gen.add_argument("--plan", required=True)
    p_gen.add_argument("--manifest", help="source manifest (defaults to plan header)")
    p_gen.add_argument("--output-root", dest="output_root")
    p_gen.add_argument("--workers", type=int,
                       help="worker processes (or env COIMG_WORKERS)")
    p_gen.set_defaults(func=cmd_generate)

    p_verify = sub.add_parser("verify", help="check generated output against its manifest")
    p_verify.add_argument("--gen-manifest", dest="gen_manifest", required=True)
    p_verify.add_argument("--output-root", dest="output_root")
    p_verify.add_argument("--spot-checks", dest="spot_checks", type=int)
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except VerificationFailed as exc:
        _print_error(type(exc).__name__, str(exc))
        return EXIT_VERIFICATION
    except (DecodeFailure, WriteFailure) as exc:
        _print_error(type(exc).__name__, str(exc))
        return EXIT_GENERATION
    except (CoimgError, ValueError, FileNotFoundError, KeyError) as exc:
        _print_error(type(exc).__name__, str(exc))
        return EXIT_VALIDATION


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
