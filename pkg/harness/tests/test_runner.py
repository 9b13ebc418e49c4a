from pathlib import Path

import numpy as np
from PIL import Image

from coimg_harness.folds import RECORD_LEVEL, make_folds
from coimg_harness.records import EvalRecord
from coimg_harness.runner import ModelConfig, train_and_eval


def write_class_images(root: Path, name: str, mean: tuple, count: int, seed: int):
    rng = np.random.default_rng(seed)
    records = []
    d = root / name
    d.mkdir(parents=True, exist_ok=True)
    for i in range(count):
        pixels = np.clip(np.asarray(mean, float) + rng.normal(0, 10, (16, 16, 3)), 0, 255)
        path = d / f"{name}_{i:03d}.png"
        Image.fromarray(pixels.astype(np.uint8), "RGB").save(path)
        records.append(EvalRecord(f"{name}/{i}", name, str(path), (f"{name}:{i}",)))
    return records


class TestTrainAndEval:
    def test_separable_two_class_reaches_95(self, tmp_path):
        records = write_class_images(tmp_path, "dark", (30, 30, 30), 60, seed=1)
        records += write_class_images(tmp_path, "lite", (220, 220, 220), 60, seed=2)
        folds = make_folds(records, RECORD_LEVEL, seed=5)
        report = train_and_eval(records, folds, ModelConfig(epochs=5, seed=5))
        assert report.accuracy >= 0.95
        assert sum(sum(row) for row in report.confusion) == 120

    def test_single_class_dataset(self, tmp_path):
        records = write_class_images(tmp_path, "only", (90, 120, 40), 10, seed=3)
        folds = make_folds(records, RECORD_LEVEL, seed=1)
        report = train_and_eval(records, folds, ModelConfig(epochs=1, seed=1))
        assert report.accuracy == 1.0
        assert report.auc is None
        assert report.auc_degenerate

    def test_deterministic_under_fixed_seed(self, tmp_path):
        records = write_class_images(tmp_path, "dark", (40, 40, 40), 15, seed=1)
        records += write_class_images(tmp_path, "lite", (210, 210, 210), 15, seed=2)
        folds = make_folds(records, RECORD_LEVEL, seed=9)
        config = ModelConfig(epochs=2, seed=9)
        first = train_and_eval(records, folds, config).to_json_dict()
        second = train_and_eval(records, folds, config).to_json_dict()
        assert first == second

    def test_confusion_rows_match_validation_counts(self, tmp_path):
        records = write_class_images(tmp_path, "dark", (40, 40, 40), 18, seed=1)
        records += write_class_images(tmp_path, "lite", (210, 210, 210), 12, seed=2)
        folds = make_folds(records, RECORD_LEVEL, seed=2)
        report = train_and_eval(records, folds, ModelConfig(epochs=1, seed=2))
        assert [sum(row) for row in report.confusion] == [18, 12]
