"""Secondary acceptance criteria: metric math and the pipeline smoke benchmark."""

import numpy as np

from conftest import generate_composites
from coimg_harness.folds import SOURCE_GROUP_LEVEL, assert_leak_free, make_folds
from coimg_harness.metrics import report_from_confusion
from coimg_harness.records import load_records
from coimg_harness.runner import ModelConfig, train_and_eval


def test_criterion_metric_math_closed_form():
    """Report metrics from a hand-built confusion matrix match closed form to 1e-9."""
    confusion = [
        [50, 2, 3],
        [4, 40, 1],
        [2, 0, 48],
    ]
    report = report_from_confusion(["a", "b", "c"], confusion)

    # closed-form values, worked from TP/FP/FN/TN by hand
    assert abs(report.accuracy - 138 / 150) < 1e-9
    assert abs(report.per_class["a"].precision - 50 / 56) < 1e-9
    assert abs(report.per_class["a"].recall - 50 / 55) < 1e-9
    assert abs(report.per_class["a"].fpr - 6 / 95) < 1e-9
    assert abs(report.per_class["a"].fnr - 5 / 55) < 1e-9
    assert abs(report.per_class["b"].precision - 40 / 42) < 1e-9
    assert abs(report.per_class["b"].fpr - 2 / 105) < 1e-9
    assert abs(report.per_class["c"].recall - 48 / 50) < 1e-9
    assert abs(report.per_class["c"].fnr - 2 / 50) < 1e-9

    # macro-F1 cross-checked via the independent 2TP/(2TP+FP+FN) form
    m = np.asarray(confusion)
    f1s = []
    for i in range(3):
        tp = m[i, i]
        f1s.append(2 * tp / (2 * tp + (m[:, i].sum() - tp) + (m[i].sum() - tp)))
    assert abs(report.macro_f1 - float(np.mean(f1s))) < 1e-9
    print("[PASS] secondary criterion: metric math matches closed form at 1e-9")


def test_criterion_pipeline_smoke_benchmark(tmp_path):
    """Toy CNN on generator output: >= 0.95 accuracy in <= 5 epochs, leak-free folds."""
    _, gen_manifest = generate_composites(tmp_path, per_class=300)
    records = load_records(gen_manifest)
    assert len(records) == 300  # 3 classes x T=100 disjoint composites

    folds = make_folds(records, SOURCE_GROUP_LEVEL, seed=11)
    assert_leak_free(records, folds)

    report = train_and_eval(records, folds, ModelConfig(epochs=5, seed=11))
    assert report.accuracy >= 0.95, f"smoke accuracy {report.accuracy:.4f}"
    assert not report.auc_degenerate
    print(f"[PASS] secondary criterion: smoke benchmark accuracy {report.accuracy:.4f}")
