"""Stratified 5-fold splits, optionally grouped by shared source images.

Record-level splitting shuffles each class independently and deals records
into near-equal validation slices.  Source-group-level splitting first joins
records that share any source image into connected components, then assigns
whole components to folds, so no source image's composites ever straddle a
train/validation boundary.  Composites of one class that overlap heavily can
collapse into a single component; the split is refused (rather than silently
degenerate) when a class has fewer than 5 groups.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from coimg_harness.errors import TooFewSamples
from coimg_harness.records import EvalRecord

RECORD_LEVEL = "record_level"
SOURCE_GROUP_LEVEL = "source_group_level"

N_FOLDS = 5

_MASK64 = (1 << 64) - 1


def _derived_seed(seed: int, class_name: str) -> int:
    """Stable per-class shuffle seed (FNV-1a fold of the class name)."""
    h = 0xCBF29CE484222325
    for byte in class_name.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return (seed ^ h) & _MASK64


@dataclass(frozen=True)
class FoldSplit:
    fold_index: int
    train_ids: tuple[str, ...]
    val_ids: tuple[str, ...]
    grouping: str


def _record_level_val_slices(
    records: list[EvalRecord], seed: int
) -> list[list[str]]:
    slices: list[list[str]] = [[] for _ in range(N_FOLDS)]
    by_class: dict[str, list[EvalRecord]] = {}
    for rec in records:
        by_class.setdefault(rec.class_name, []).append(rec)
    for class_name in sorted(by_class):
        members = sorted(r.record_id for r in by_class[class_name])
        if len(members) < N_FOLDS:
            raise TooFewSamples(
                f"class {class_name} has {len(members)} records; need >= {N_FOLDS}"
            )
        random.Random(_derived_seed(seed, class_name)).shuffle(members)
        for i, record_id in enumerate(members):
            slices[i % N_FOLDS].append(record_id)
    return slices


def _source_groups(records: list[EvalRecord]) -> list[list[str]]:
    """Connected components of records linked by shared source images."""
    parent: dict[str, str] = {r.record_id: r.record_id for r in records}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    by_source: dict[str, str] = {}
    for rec in sorted(records, key=lambda r: r.record_id):
        for source in rec.source_ids:
            if source in by_source:
                union(by_source[source], rec.record_id)
            else:
                by_source[source] = rec.record_id
    groups: dict[str, list[str]] = {}
    for rec in records:
        groups.setdefault(find(rec.record_id), []).append(rec.record_id)
    return [sorted(g) for g in sorted(groups.values())]


def _group_level_val_slices(records: list[EvalRecord], seed: int) -> list[list[str]]:
    slices: list[list[str]] = [[] for _ in range(N_FOLDS)]
    by_class: dict[str, list[EvalRecord]] = {}
    for rec in records:
        by_class.setdefault(rec.class_name, []).append(rec)
    for class_name in sorted(by_class):
        groups = _source_groups(by_class[class_name])
        if len(groups) < N_FOLDS:
            raise TooFewSamples(
                f"class {class_name} has {len(groups)} source groups; need >= {N_FOLDS} "
                f"(use record_level for heavily overlapping composites)"
            )
        random.Random(_derived_seed(seed, class_name)).shuffle(groups)
        # biggest groups first onto the currently-lightest fold
        sizes = [0] * N_FOLDS
        for group in sorted(groups, key=len, reverse=True):
            fold = min(range(N_FOLDS), key=lambda i: (sizes[i], i))
            slices[fold].extend(group)
            sizes[fold] += len(group)
    return slices


def make_folds(
    records: list[EvalRecord], mode: str = RECORD_LEVEL, seed: int = 0
) -> list[FoldSplit]:
    """Five stratified folds, deterministic in ``seed``."""
    if mode not in (RECORD_LEVEL, SOURCE_GROUP_LEVEL):
        raise ValueError(f"unknown fold mode {mode!r}")
    if mode == RECORD_LEVEL:
        val_slices = _record_level_val_slices(records, seed)
    else:
        val_slices = _group_level_val_slices(records, seed)
    all_ids = [r.record_id for r in records]
    folds = []
    for i, val in enumerate(val_slices):
        val_set = set(val)
        folds.append(
            FoldSplit(
                fold_index=i,
                train_ids=tuple(sorted(r for r in all_ids if r not in val_set)),
                val_ids=tuple(sorted(val)),
                grouping=mode,
            )
        )
    return folds


def assert_leak_free(records: list[EvalRecord], folds: list[FoldSplit]) -> None:
    """Raise if any source image appears on both sides of any fold."""
    sources = {r.record_id: set(r.source_ids) for r in records}
    for fold in folds:
        train_sources = set().union(*(sources[i] for i in fold.train_ids)) if fold.train_ids else set()
        val_sources = set().union(*(sources[i] for i in fold.val_ids)) if fold.val_ids else set()
        shared = train_sources & val_sources
        if shared:
            raise AssertionError(
                f"fold {fold.fold_index}: {len(shared)} source image(s) leak across the split"
            )
