"""Harness entry point: evaluate a baseline manifest against a composite one."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from coimg_harness.errors import HarnessError
from coimg_harness.folds import RECORD_LEVEL, SOURCE_GROUP_LEVEL, make_folds
from coimg_harness.metrics import compare_runs, render_comparison
from coimg_harness.records import load_records
from coimg_harness.runner import ModelConfig, train_and_eval


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coimg-harness",
        description="5-fold cross-validation of original vs composite datasets",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_eval = sub.add_parser("evaluate", help="train and compare the two datasets")
    p_eval.add_argument("--baseline", required=True, help="dataset manifest JSON")
    p_eval.add_argument("--composite", required=True, help="generation manifest JSONL")
    p_eval.add_argument("--seed", type=int, required=True)
    p_eval.add_argument("--epochs", type=int, default=5)
    p_eval.add_argument("--batch-size", dest="batch_size", type=int, default=32)
    p_eval.add_argument("--lr", type=float, default=1e-3)
    p_eval.add_argument("--image-size", dest="image_size", type=int, default=32)
    p_eval.add_argument("--baseline-mode", dest="baseline_mode",
                        choices=[RECORD_LEVEL, SOURCE_GROUP_LEVEL], default=RECORD_LEVEL)
    p_eval.add_argument("--composite-mode", dest="composite_mode",
                        choices=[RECORD_LEVEL, SOURCE_GROUP_LEVEL],
                        default=SOURCE_GROUP_LEVEL,
                        help="composites sharing sources leak under record_level")
    p_eval.add_argument("--out", help="write the full JSON report here")
    p_eval.set_defaults(func=cmd_evaluate)
    return parser


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = ModelConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        image_size=args.image_size,
        seed=args.seed,
    )
    reports = {}
    for label, manifest, mode in (
        ("baseline", args.baseline, args.baseline_mode),
        ("composite", args.composite, args.composite_mode),
    ):
        records = load_records(manifest)
        folds = make_folds(records, mode=mode, seed=args.seed)
        reports[label] = train_and_eval(records, folds, config)
        print(f"{label}: {len(records)} records, accuracy {reports[label].accuracy:.4f}")

    rows = compare_runs(reports["baseline"], reports["composite"])
    print(render_comparison(rows))
    if args.out:
        doc = {
            "baseline": reports["baseline"].to_json_dict(),
            "composite": reports["composite"].to_json_dict(),
            "comparison": [vars(r).copy() for r in rows],
        }
        Path(args.out).write_text(json.dumps(doc, sort_keys=True, indent=2))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (HarnessError, ValueError, FileNotFoundError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
