"""Classification metrics computed from pooled validation predictions.

Everything except AUC derives from the confusion matrix; AUC is the
tie-corrected Mann-Whitney statistic per class (one-vs-rest on the predicted
probability of that class), macro-averaged.  Classes with no positives or no
negatives in validation make AUC degenerate; the report flags this instead
of inventing a number.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    fpr: float
    fnr: float
    support: int


@dataclass
class MetricsReport:
    classes: list[str]
    confusion: list[list[int]]
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    auc: float | None
    auc_degenerate: bool
    per_class: dict[str, ClassMetrics]
    per_fold_accuracy: list[float] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "classes": self.classes,
            "confusion": self.confusion,
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "auc": self.auc,
            "auc_degenerate": self.auc_degenerate,
            "per_class": {
                name: vars(m).copy() for name, m in self.per_class.items()
            },
            "per_fold_accuracy": self.per_fold_accuracy,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)


def _safe_div(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def report_from_confusion(
    classes: list[str],
    confusion: np.ndarray | list[list[int]],
    scores: np.ndarray | None = None,
    labels: np.ndarray | None = None,
    per_fold_accuracy: list[float] | None = None,
) -> MetricsReport:
    """Build the full report from a confusion matrix (rows = true class).

    ``scores``/``labels`` (per-sample class probabilities and true indices)
    are optional and only feed the AUC.
    """
    matrix = np.asarray(confusion, dtype=np.int64)
    n = len(classes)
    if matrix.shape != (n, n):
        raise ValueError(f"confusion matrix must be {n}x{n}")
    total = int(matrix.sum())
    if total == 0:
        raise ValueError("empty confusion matrix")

    per_class: dict[str, ClassMetrics] = {}
    for i, name in enumerate(classes):
        tp = float(matrix[i, i])
        fn = float(matrix[i].sum() - tp)
        fp = float(matrix[:, i].sum() - tp)
        tn = float(total - tp - fn - fp)
        precision = _safe_div(tp, tp + fp)
        recall = _safe_div(tp, tp + fn)
        per_class[name] = ClassMetrics(
            precision=precision,
            recall=recall,
            f1=_safe_div(2.0 * precision * recall, precision + recall),
            fpr=_safe_div(fp, fp + tn),
            fnr=_safe_div(fn, fn + tp),
            support=int(matrix[i].sum()),
        )

    auc, degenerate = (None, True)
    if scores is not None and labels is not None:
        auc, degenerate = _macro_ovr_auc(np.asarray(scores), np.asarray(labels), n)

    return MetricsReport(
        classes=list(classes),
        confusion=matrix.tolist(),
        accuracy=float(np.trace(matrix)) / total,
        macro_precision=float(np.mean([m.precision for m in per_class.values()])),
        macro_recall=float(np.mean([m.recall for m in per_class.values()])),
        macro_f1=float(np.mean([m.f1 for m in per_class.values()])),
        auc=auc,
        auc_degenerate=degenerate,
        per_class=per_class,
        per_fold_accuracy=list(per_fold_accuracy or []),
    )


def binary_auc(scores: np.ndarray, positives: np.ndarray) -> float:
    """Tie-corrected Mann-Whitney AUC for one class."""
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0  # average rank, 1-based
        i = j + 1
    n_pos = int(positives.sum())
    n_neg = len(positives) - n_pos
    rank_sum = float(ranks[positives].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _macro_ovr_auc(
    scores: np.ndarray, labels: np.ndarray, n_classes: int
) -> tuple[float | None, bool]:
    aucs = []
    degenerate = False
    for c in range(n_classes):
        positives = labels == c
        n_pos = int(positives.sum())
        if n_pos == 0 or n_pos == len(labels):
            degenerate = True
            continue
        aucs.append(binary_auc(scores[:, c], positives))
    if not aucs:
        return None, True
    return float(np.mean(aucs)), degenerate


@dataclass
class ComparisonRow:
    metric: str
    baseline: float | None
    proposed: float | None
    delta: float | None


def compare_runs(baseline: MetricsReport, proposed: MetricsReport) -> list[ComparisonRow]:
    """Side-by-side metric deltas (proposed minus baseline)."""
    rows = []
    for metric in ("accuracy", "macro_f1", "auc", "macro_precision", "macro_recall"):
        b = getattr(baseline, metric)
        p = getattr(proposed, metric)
        delta = (p - b) if (b is not None and p is not None) else None
        rows.append(ComparisonRow(metric=metric, baseline=b, proposed=p, delta=delta))
    return rows


def render_comparison(rows: list[ComparisonRow]) -> str:
    def fmt(v: float | None) -> str:
        return "n/a" if v is None else f"{v:.4f}"

    lines = [f"{'metric':<16} {'baseline':>10} {'proposed':>10} {'delta':>10}"]
    for row in rows:
        lines.append(
            f"{row.metric:<16} {fmt(row.baseline):>10} {fmt(row.proposed):>10} "
            f"{fmt(row.delta):>10}"
        )
    return "\n".join(lines)
