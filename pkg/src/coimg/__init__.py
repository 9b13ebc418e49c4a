"""Deterministic class-balanced composite-image dataset generation.

The pipeline turns a directory-per-class image corpus into a perfectly
class-balanced dataset of grid composites: scan -> plan -> generate -> verify.
Every stage is driven by a single seed and emits verifiable JSON manifests.
"""

__version__ = "0.1.0"

from coimg.combinatorics import (
    CombinationSpace,
    binomial,
    multiset_binomial,
    rank_combination,
    sample_distinct_ranks,
    unrank_combination,
)
from coimg.composer import CompositeRecord, Layout, SlotTransform, create_coimg
from coimg.manifest import DatasetManifest, ImageEntry, class_stats, scan_dataset
from coimg.selection import SelectionPolicy, SimilarityMatrix, similarity
from coimg.balancer import CompositePlan, compute_target, plan_balanced, plan_unbalanced

__all__ = [
    "__version__",
    "CombinationSpace",
    "binomial",
    "multiset_binomial",
    "unrank_combination",
    "rank_combination",
    "sample_distinct_ranks",
    "Layout",
    "SlotTransform",
    "CompositeRecord",
    "create_coimg",
    "DatasetManifest",
    "ImageEntry",
    "scan_dataset",
    "class_stats",
    "SelectionPolicy",
    "SimilarityMatrix",
    "similarity",
    "CompositePlan",
    "compute_target",
    "plan_balanced",
    "plan_unbalanced",
]
