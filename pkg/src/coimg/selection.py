"""Policies deciding which same-class images form each composite.

``class_based`` maps ranks straight through the lexicographic unranking.
The similarity policies re-order the class indices by total pairwise
similarity before unranking, so low ranks group mutually similar (or
dissimilar) images; counts and balancing math are unchanged because every
policy remains a bijection from ranks onto member sets.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from coimg.combinatorics import CombinationSpace, unrank_combination
from coimg.errors import PolicyMissingSimilarity, SimilarityMatrixTooLarge
from coimg.imaging import decode_image, resize_bilinear
from coimg.manifest import ImageEntry

POLICY_KINDS = ("class_based", "similarity_high", "similarity_low", "heterogeneous_mix")

THUMBNAIL_SIZE = 32

# Pairwise scoring is O(N^2); beyond this the matrix is refused outright.
MAX_SIMILARITY_CLASS_SIZE = 5_000


@dataclass(frozen=True)
class SelectionPolicy:
    """How members are chosen: policy kind, mix fraction, repetition flag."""

    kind: str = "class_based"
    high_fraction: float | None = None
    with_repetition: bool = False

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "heterogeneous_mix":
            if self.high_fraction is None or not 0.0 <= self.high_fraction <= 1.0:
                raise ValueError("heterogeneous_mix needs high_fraction in [0, 1]")

    @property
    def needs_similarity(self) -> bool:
        return self.kind != "class_based"

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "high_fraction": self.high_fraction,
            "with_repetition": self.with_repetition,
        }


@dataclass
class SimilarityMatrix:
    """Symmetric pairwise similarity scores for one class, values in [0, 1]."""

    class_name: str
    scores: np.ndarray


def _thumbnail(pixels: np.ndarray) -> np.ndarray:
    """32x32 grayscale thumbnail with values in [0, 1]."""
    gray = (
        0.299 * pixels[:, :, 0] + 0.587 * pixels[:, :, 1] + 0.114 * pixels[:, :, 2]
    ) / 255.0
    return resize_bilinear(gray, THUMBNAIL_SIZE, THUMBNAIL_SIZE)


def similarity(a: np.ndarray, b: np.ndarray) -> float:
    """1 minus the mean absolute difference of 32x32 grayscale thumbnails."""
    return float(1.0 - np.mean(np.abs(_thumbnail(a) - _thumbnail(b))))


def build_similarity_matrix(
    class_entries: list[ImageEntry], root: str | Path
) -> SimilarityMatrix:
    """Pairwise similarity over one class's images, in entry-index order."""
    if not class_entries:
        raise ValueError("cannot build a similarity matrix for an empty class")
    if len(class_entries) > MAX_SIMILARITY_CLASS_SIZE:
        raise SimilarityMatrixTooLarge(
            f"class {class_entries[0].class_name} has {len(class_entries)} images; "
            f"similarity policies are limited to {MAX_SIMILARITY_CLASS_SIZE}"
        )
    root = Path(root)
    thumbs = np.stack(
        [_thumbnail(decode_image(root / e.relative_path)) for e in class_entries]
    )
    n = len(class_entries)
    scores = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        scores[i] = 1.0 - np.abs(thumbs - thumbs[i]).mean(axis=(1, 2))
        scores[i, i] = 1.0
    return SimilarityMatrix(class_name=class_entries[0].class_name, scores=scores)


def matrix_cache_key(class_entries: list[ImageEntry]) -> str:
    """Cache key over the class's content digests, order-sensitive."""
    h = hashlib.sha256()
    for entry in class_entries:
        h.update(entry.content_digest.encode("ascii"))
        h.update(b"\n")
    return h.hexdigest()


def save_matrix(path: str | Path, matrix: SimilarityMatrix, key: str) -> None:
    doc = {
        "class": matrix.class_name,
        "key": key,
        "n": int(matrix.scores.shape[0]),
        # hex float serialization keeps cached scores bit-identical
        "scores": [v.hex() for v in matrix.scores.ravel().tolist()],
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")))


def load_matrix(path: str | Path, expected_key: str) -> SimilarityMatrix | None:
    """Load a cached matrix; returns None when missing or key-mismatched."""
    path = Path(path)
    if not path.exists():
        return None
    doc = json.loads(path.read_text())
    if doc.get("key") != expected_key:
        return None
    n = doc["n"]
    scores = np.array([float.fromhex(v) for v in doc["scores"]], dtype=np.float64)
    return SimilarityMatrix(class_name=doc["class"], scores=scores.reshape(n, n))


def similarity_order(sim: SimilarityMatrix, descending: bool) -> list[int]:
    """Class indices ordered by total similarity (row sums), ties by index."""
    totals = sim.scores.sum(axis=1)
    idx = list(range(len(totals)))
    idx.sort(key=lambda i: (-totals[i], i) if descending else (totals[i], i))
    return idx


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def select_members(
    policy: SelectionPolicy,
    class_entries: list[ImageEntry],
    sim: SimilarityMatrix | None,
    rank: int,
    space: CombinationSpace,
) -> tuple[int, ...]:
    """Member indices (sorted, class-local) for one rank under a policy."""
    if policy.needs_similarity and sim is None:
        raise PolicyMissingSimilarity(f"policy {policy.kind} requires a similarity matrix")
    if len(class_entries) != space.n:
        raise ValueError("entry count does not match combination space population")

    base = unrank_combination(space, rank)
    if policy.kind == "class_based":
        return base

    desc = similarity_order(sim, descending=True)
    if policy.kind == "similarity_high":
        return _sorted_tuple((desc[p] for p in base), policy)
    asc = desc[::-1]
    if policy.kind == "similarity_low":
        return _sorted_tuple((asc[p] for p in base), policy)

    # heterogeneous_mix: the first h slots follow the descending ordering,
    # the rest the ascending one; collisions skip forward (wrapping).
    k, n = space.k, space.n
    h = _round_half_up(policy.high_fraction * k)
    chosen: list[int] = []
    used: set[int] = set()
    for slot, pos in enumerate(base):
        order = desc if slot < h else asc
        if policy.with_repetition:
            chosen.append(order[pos % n])
            continue
        p = pos
        while order[p % n] in used:
            p += 1
        value = order[p % n]
        used.add(value)
        chosen.append(value)
    return _sorted_tuple(chosen, policy)


def _sorted_tuple(values, policy: SelectionPolicy) -> tuple[int, ...]:
    out = tuple(sorted(values))
    if not policy.with_repetition and len(set(out)) != len(out):
        raise AssertionError("policy produced duplicate members without repetition")
    return out
