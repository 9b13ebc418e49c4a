"""Plan per-class composite budgets so every class lands on the same target.

The target T is the minority class's full combination count.  Classes whose
space exceeds T get T distinct ranks sampled without enumeration; a class
exactly at T is planned exhaustively; a class below T (possible only with an
explicit target override) emits all its unique combinations once and then
cycles them with epoch-numbered augmentation so repeats stay pixel-distinct.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import coimg
from coimg.combinatorics import (
    U128_MAX,
    CombinationSpace,
    sample_distinct_ranks,
)
from coimg.composer import (
    CompositeRecord,
    Layout,
    derive_slot_transforms,
    record_output_path,
)
from coimg.errors import DegenerateClass, OverrideTooLarge, PlanTooLarge
from coimg.manifest import DatasetManifest
from coimg.rng import class_seed
from coimg.selection import (
    SelectionPolicy,
    SimilarityMatrix,
    build_similarity_matrix,
    load_matrix,
    matrix_cache_key,
    save_matrix,
    select_members,
)

DEFAULT_GENERATION_LIMIT = 1_000_000

MODE_EXHAUSTIVE = "exhaustive"
MODE_SAMPLED = "sampled"
MODE_COMPLETION = "completion"
MODE_CAPPED = "capped"


@dataclass
class ClassPlan:
    """One class's budget: its space size, planning mode, and records."""

    class_name: str
    n_images: int
    space_size: int
    mode: str
    records: list[CompositeRecord]
    sampled_ranks: list[int] | None = None
    epochs_needed: int = 0

    def to_json_dict(self) -> dict:
        return {
            "class": self.class_name,
            "images": self.n_images,
            "space_size": self.space_size,
            "mode": self.mode,
            "epochs_needed": self.epochs_needed,
            "records": [r.to_json_dict() for r in self.records],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ClassPlan":
        records = [CompositeRecord.from_json_dict(r) for r in doc["records"]]
        sampled = [r.rank for r in records] if doc["mode"] == MODE_SAMPLED else None
        return cls(
            class_name=doc["class"],
            n_images=doc["images"],
            space_size=doc["space_size"],
            mode=doc["mode"],
            records=records,
            sampled_ranks=sampled,
            epochs_needed=doc["epochs_needed"],
        )


@dataclass
class CompositePlan:
    """Full generation plan plus the provenance needed to reproduce it."""

    kind: str
    target: int | None
    layout: Layout
    policy: SelectionPolicy
    seed: int
    class_plans: list[ClassPlan]
    tool_version: str = coimg.__version__
    source_manifest: str | None = None
    config: dict | None = None

    @property
    def k(self) -> int:
        return self.layout.k

    def total_records(self) -> int:
        return sum(len(cp.records) for cp in self.class_plans)

    def iter_records(self):
        for cp in self.class_plans:
            yield from cp.records

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "tool_version": self.tool_version,
            "target": self.target,
            "k": self.k,
            "layout": self.layout.to_json_dict(),
            "policy": self.policy.to_json_dict(),
            "seed": self.seed,
            "source_manifest": self.source_manifest,
            "config": self.config,
            "classes": [cp.to_json_dict() for cp in self.class_plans],
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":")) + "\n"
        )

    @classmethod
    def from_json_dict(cls, doc: dict) -> "CompositePlan":
        return cls(
            kind=doc["kind"],
            target=doc["target"],
            layout=Layout.from_json_dict(doc["layout"]),
            policy=SelectionPolicy(**doc["policy"]),
            seed=doc["seed"],
            class_plans=[ClassPlan.from_json_dict(c) for c in doc["classes"]],
            tool_version=doc["tool_version"],
            source_manifest=doc["source_manifest"],
            config=doc["config"],
        )

    @classmethod
    def read(cls, path: str | Path) -> "CompositePlan":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def _class_space(n: int, k: int, with_repetition: bool, disjoint: bool) -> int:
    if disjoint:
        return n // k
    return CombinationSpace(n, k, with_repetition=with_repetition).size


def compute_target(
    manifest: DatasetManifest,
    k: int,
    with_repetition: bool = False,
    disjoint: bool = False,
) -> int:
    """Balancing target: the minimum combination count across classes."""
    if k < 1:
        raise ValueError("composite size k must be at least 1")
    sizes = {
        name: _class_space(len(entries), k, with_repetition, disjoint)
        for name, entries in manifest.classes
    }
    worst = min(sizes, key=lambda name: (sizes[name], name))
    if sizes[worst] == 0:
        raise DegenerateClass(
            f"class {worst} admits no size-{k} composites "
            f"({len(manifest.entries(worst))} images, repetition"
            f"{'' if with_repetition else ' dis'}allowed)"
        )
    return sizes[worst]


@dataclass
class ClassSummaryRow:
    class_name: str
    n_images: int
    space_size: int
    mode: str
    planned: int


@dataclass
class PlanSummary:
    """Table-shaped overview: per-class spaces, modes, and the balanced total."""

    rows: list[ClassSummaryRow]
    total_images: int
    total_space: int
    target: int
    balanced_total: int


def summarize(
    manifest: DatasetManifest,
    k: int,
    with_repetition: bool = False,
    disjoint: bool = False,
    override_target: int | None = None,
) -> PlanSummary:
    """Exact per-class counts and balancing modes, without materialization."""
    target = override_target or compute_target(manifest, k, with_repetition, disjoint)
    rows = []
    for name, entries in manifest.classes:
        size = _class_space(len(entries), k, with_repetition, disjoint)
        if size > target:
            mode = MODE_SAMPLED
        elif size == target:
            mode = MODE_EXHAUSTIVE
        else:
            mode = MODE_COMPLETION
        rows.append(
            ClassSummaryRow(
                class_name=name,
                n_images=len(entries),
                space_size=size,
                mode=mode,
                planned=target,
            )
        )
    return PlanSummary(
        rows=rows,
        total_images=manifest.total_images(),
        total_space=sum(r.space_size for r in rows),
        target=target,
        balanced_total=target * len(rows),
    )


class _SimilarityProvider:
    """Builds (and optionally disk-caches) per-class similarity matrices."""

    def __init__(self, manifest: DatasetManifest, cache_dir: str | Path | None) -> None:
        self._manifest = manifest
        self._cache_dir = Path(cache_dir) if cache_dir else None

    def get(self, class_name: str) -> SimilarityMatrix:
        entries = self._manifest.entries(class_name)
        key = matrix_cache_key(entries)
        cache_path = None
        if self._cache_dir is not None:
            self._cache_dir.mkdir(parents=True, exist_ok=True)
            cache_path = self._cache_dir / f"sim_{class_name}.json"
            cached = load_matrix(cache_path, key)
            if cached is not None:
                return cached
        matrix = build_similarity_matrix(entries, self._manifest.root)
        if cache_path is not None:
            save_matrix(cache_path, matrix, key)
        return matrix


def _build_records(
    manifest: DatasetManifest,
    class_name: str,
    rank_epochs: list[tuple[int, int]],
    layout: Layout,
    policy: SelectionPolicy,
    seed: int,
    max_rotation_degrees: float,
    image_format: str,
    disjoint: bool,
    sim: SimilarityMatrix | None,
) -> list[CompositeRecord]:
    entries = manifest.entries(class_name)
    k = layout.k
    space = None
    if not disjoint:
        space = CombinationSpace(len(entries), k, with_repetition=policy.with_repetition)
    records = []
    for rank, epoch in rank_epochs:
        if disjoint:
            members = tuple(range(rank * k, (rank + 1) * k))
        else:
            members = select_members(policy, entries, sim, rank, space)
        records.append(
            CompositeRecord(
                class_name=class_name,
                rank=rank,
                member_indices=members,
                slot_transforms=derive_slot_transforms(
                    seed, (class_name, rank, epoch), k, max_rotation_degrees
                ),
                augmentation_epoch=epoch,
                output_path=record_output_path(class_name, rank, epoch, image_format),
            )
        )
    return records


def plan_balanced(
    manifest: DatasetManifest,
    layout: Layout,
    policy: SelectionPolicy,
    seed: int,
    override_target: int | None = None,
    max_rotation_degrees: float = 3.0,
    image_format: str = "png",
    disjoint: bool = False,
    generation_limit: int = DEFAULT_GENERATION_LIMIT,
    sim_cache_dir: str | Path | None = None,
    source_manifest: str | None = None,
    config: dict | None = None,
) -> CompositePlan:
    """Plan exactly T records for every class (Balanced Co-Dataset Generation)."""
    if disjoint and policy.kind != "class_based":
        raise ValueError("disjoint planning supports only the class_based policy")
    k = layout.k
    if override_target is not None:
        if override_target > U128_MAX:
            raise OverrideTooLarge(f"override target {override_target} exceeds 128 bits")
        if override_target < 1:
            raise ValueError("override target must be at least 1")
        target = override_target
        # Completion mode still needs at least one combination per class.
        for name, entries in manifest.classes:
            if _class_space(len(entries), k, policy.with_repetition, disjoint) == 0:
                raise DegenerateClass(f"class {name} admits no size-{k} composites")
    else:
        target = compute_target(manifest, k, policy.with_repetition, disjoint)

    total = target * len(manifest.classes)
    if total > generation_limit:
        raise PlanTooLarge(
            f"balanced plan would materialize {total} records "
            f"(limit {generation_limit}); counting via summarize() is always exact"
        )

    sim_provider = _SimilarityProvider(manifest, sim_cache_dir)
    class_plans = []
    for name, entries in manifest.classes:
        size = _class_space(len(entries), k, policy.with_repetition, disjoint)
        sampled: list[int] | None = None
        epochs_needed = 0
        if size > target:
            mode = MODE_SAMPLED
            sampled = sample_distinct_ranks(size, target, class_seed(seed, name))
            rank_epochs = [(rank, 0) for rank in sampled]
        elif size == target:
            mode = MODE_EXHAUSTIVE
            rank_epochs = [(rank, 0) for rank in range(size)]
        else:
            mode = MODE_COMPLETION
            epochs_needed = (target + size - 1) // size - 1
            rank_epochs = [
                (rank, epoch)
                for epoch in range(epochs_needed + 1)
                for rank in range(size)
            ][:target]
        sim = sim_provider.get(name) if policy.needs_similarity else None
        records = _build_records(
            manifest, name, rank_epochs, layout, policy, seed,
            max_rotation_degrees, image_format, disjoint, sim,
        )
        class_plans.append(
            ClassPlan(
                class_name=name,
                n_images=len(entries),
                space_size=size,
                mode=mode,
                records=records,
                sampled_ranks=sampled,
                epochs_needed=epochs_needed,
            )
        )
    return CompositePlan(
        kind="balanced",
        target=target,
        layout=layout,
        policy=policy,
        seed=seed,
        class_plans=class_plans,
        source_manifest=source_manifest,
        config=config,
    )


def plan_unbalanced(
    manifest: DatasetManifest,
    layout: Layout,
    policy: SelectionPolicy,
    seed: int,
    per_class_cap: int | None = None,
    max_rotation_degrees: float = 3.0,
    image_format: str = "png",
    disjoint: bool = False,
    generation_limit: int = DEFAULT_GENERATION_LIMIT,
    sim_cache_dir: str | Path | None = None,
    source_manifest: str | None = None,
    config: dict | None = None,
) -> CompositePlan:
    """Plan min(cap, space) records per class, without the equal-T invariant."""
    if disjoint and policy.kind != "class_based":
        raise ValueError("disjoint planning supports only the class_based policy")
    k = layout.k
    counts = {}
    for name, entries in manifest.classes:
        size = _class_space(len(entries), k, policy.with_repetition, disjoint)
        counts[name] = size if per_class_cap is None else min(per_class_cap, size)
    total = sum(counts.values())
    if total > generation_limit:
        raise PlanTooLarge(
            f"unbalanced plan would materialize {total} records "
            f"(limit {generation_limit}); counting via summarize() is always exact"
        )

    sim_provider = _SimilarityProvider(manifest, sim_cache_dir)
    class_plans = []
    for name, entries in manifest.classes:
        size = _class_space(len(entries), k, policy.with_repetition, disjoint)
        count = counts[name]
        sim = sim_provider.get(name) if policy.needs_similarity else None
        records = _build_records(
            manifest, name, [(rank, 0) for rank in range(count)], layout, policy,
            seed, max_rotation_degrees, image_format, disjoint, sim,
        )
        class_plans.append(
            ClassPlan(
                class_name=name,
                n_images=len(entries),
                space_size=size,
                mode=MODE_EXHAUSTIVE if count == size else MODE_CAPPED,
                records=records,
            )
        )
    return CompositePlan(
        kind="unbalanced",
        target=None,
        layout=layout,
        policy=policy,
        seed=seed,
        class_plans=class_plans,
        source_manifest=source_manifest,
        config=config,
    )
