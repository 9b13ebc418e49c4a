import numpy as np
import pytest

from coimg_harness.metrics import (
    binary_auc,
    compare_runs,
    render_comparison,
    report_from_confusion,
)

CONFUSION = [
    [50, 2, 3],
    [4, 40, 1],
    [2, 0, 48],
]
CLASSES = ["a", "b", "c"]


def closed_form_class_metrics(matrix, i):
    """Independent textbook formulas, straight from TP/FP/FN/TN."""
    m = np.asarray(matrix)
    total = m.sum()
    tp = m[i, i]
    fn = m[i].sum() - tp
    fp = m[:, i].sum() - tp
    tn = total - tp - fn - fp
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return {
        "precision": precision,
        "recall": recall,
        "f1": 2 * precision * recall / (precision + recall),
        "fpr": fp / (fp + tn),
        "fnr": fn / (fn + tp),
    }


class TestConfusionMetrics:
    def test_accuracy_is_trace_over_total(self):
        report = report_from_confusion(CLASSES, CONFUSION)
        assert abs(report.accuracy - 138 / 150) < 1e-9

    def test_per_class_closed_form(self):
        report = report_from_confusion(CLASSES, CONFUSION)
        for i, name in enumerate(CLASSES):
            expected = closed_form_class_metrics(CONFUSION, i)
            got = report.per_class[name]
            for key, value in expected.items():
                assert abs(getattr(got, key) - value) < 1e-9, (name, key)

    def test_macro_values(self):
        report = report_from_confusion(CLASSES, CONFUSION)
        per = [closed_form_class_metrics(CONFUSION, i) for i in range(3)]
        assert abs(report.macro_precision - np.mean([p["precision"] for p in per])) < 1e-9
        assert abs(report.macro_recall - np.mean([p["recall"] for p in per])) < 1e-9
        assert abs(report.macro_f1 - np.mean([p["f1"] for p in per])) < 1e-9

    def test_macro_f1_independent_formulation(self):
        # cross-check with f1 = 2TP / (2TP + FP + FN), no precision/recall detour
        m = np.asarray(CONFUSION)
        f1s = []
        for i in range(3):
            tp = m[i, i]
            fp = m[:, i].sum() - tp
            fn = m[i].sum() - tp
            f1s.append(2 * tp / (2 * tp + fp + fn))
        report = report_from_confusion(CLASSES, CONFUSION)
        assert abs(report.macro_f1 - np.mean(f1s)) < 1e-9

    def test_row_sums_are_class_supports(self):
        report = report_from_confusion(CLASSES, CONFUSION)
        for i, name in enumerate(CLASSES):
            assert report.per_class[name].support == sum(CONFUSION[i])

    def test_empty_matrix_rejected(self):
        with pytest.raises(ValueError):
            report_from_confusion(["a"], [[0]])


class TestAuc:
    def test_hand_case(self):
        scores = np.array([0.1, 0.4, 0.35, 0.8])
        positives = np.array([False, False, True, True])
        assert abs(binary_auc(scores, positives) - 0.75) < 1e-12

    def test_all_tied_scores_give_half(self):
        scores = np.array([0.5, 0.5, 0.5, 0.5])
        positives = np.array([True, False, True, False])
        assert abs(binary_auc(scores, positives) - 0.5) < 1e-12

    def test_perfect_separation_in_report(self):
        labels = np.array([0, 0, 1, 1, 2, 2])
        scores = np.eye(3)[labels] * 0.8 + 0.1
        confusion = np.eye(3, dtype=int) * 2
        report = report_from_confusion(["a", "b", "c"], confusion, scores, labels)
        assert report.auc == pytest.approx(1.0)
        assert not report.auc_degenerate

    def test_single_class_flags_degenerate_auc(self):
        labels = np.zeros(7, dtype=int)
        scores = np.ones((7, 1))
        report = report_from_confusion(["only"], [[7]], scores, labels)
        assert report.accuracy == 1.0
        assert report.auc is None
        assert report.auc_degenerate


class TestCompareRuns:
    def make_report(self, accuracy):
        n = 100
        right = round(accuracy * n)
        confusion = [[right, n - right], [0, n]]
        return report_from_confusion(["x", "y"], confusion)

    def test_identical_reports_zero_deltas(self):
        r = report_from_confusion(CLASSES, CONFUSION)
        for row in compare_runs(r, r):
            if row.delta is not None:
                assert row.delta == 0.0

    def test_accuracy_delta_rendering(self):
        baseline = report_from_confusion(["x"], [[1]])
        proposed = report_from_confusion(["x"], [[1]])
        baseline.accuracy = 0.859
        proposed.accuracy = 0.9970
        rows = compare_runs(baseline, proposed)
        acc = next(r for r in rows if r.metric == "accuracy")
        assert abs(acc.delta - 0.138) < 1e-9
        table = render_comparison(rows)
        assert "0.8590" in table and "0.9970" in table and "0.1380" in table

    def test_deltas_equal_direct_subtraction(self):
        a = report_from_confusion(CLASSES, CONFUSION)
        b = report_from_confusion(CLASSES, [[55, 0, 0], [0, 45, 0], [0, 0, 50]])
        for row in compare_runs(a, b):
            if row.delta is not None:
                assert row.delta == pytest.approx(row.proposed - row.baseline)
