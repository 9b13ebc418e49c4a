"""Cross-validated training and evaluation over manifest-driven records.

The protocol mirrors the full-scale recipe in shape (Adam, cross-entropy,
batch size 32, 5 folds) but swaps the backbone for a small CNN and caps
epochs, so a run finishes in desk time.  Validation predictions are pooled
across folds into one confusion matrix; per-fold accuracies ride along.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn
from PIL import Image

from coimg_harness.errors import TrainingDiverged
from coimg_harness.folds import FoldSplit
from coimg_harness.metrics import MetricsReport, report_from_confusion
from coimg_harness.model import SmallCNN
from coimg_harness.records import EvalRecord


@dataclass
class ModelConfig:
    """Training knobs; the defaults are the toy-scale profile."""

    epochs: int = 5
    batch_size: int = 32
    learning_rate: float = 1e-3
    image_size: int = 32
    seed: int = 0


def _load_image_tensor(path: str, image_size: int) -> np.ndarray:
    with Image.open(path) as im:
        resized = im.convert("RGB").resize((image_size, image_size), Image.BILINEAR)
    arr = np.asarray(resized, dtype=np.float32) / 255.0
    return arr.transpose(2, 0, 1)  # CHW


def _stack(
    ids: tuple[str, ...],
    cache: dict[str, np.ndarray],
    labels: dict[str, int],
) -> tuple[torch.Tensor, torch.Tensor]:
    xs = np.stack([cache[i] for i in ids])
    ys = np.array([labels[i] for i in ids], dtype=np.int64)
    return torch.from_numpy(xs), torch.from_numpy(ys)


def train_and_eval(
    records: list[EvalRecord], folds: list[FoldSplit], config: ModelConfig
) -> MetricsReport:
    """Train one model per fold; report metrics over pooled validation sets."""
    classes = sorted({r.class_name for r in records})
    class_index = {c: i for i, c in enumerate(classes)}
    labels = {r.record_id: class_index[r.class_name] for r in records}
    cache = {r.record_id: _load_image_tensor(r.path, config.image_size) for r in records}

    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    pooled_scores: list[np.ndarray] = []
    pooled_labels: list[np.ndarray] = []
    per_fold_accuracy: list[float] = []

    for fold in folds:
        torch.manual_seed(config.seed * 1_000_003 + fold.fold_index)
        model = SmallCNN(len(classes))
        optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
        loss_fn = nn.CrossEntropyLoss()
        train_x, train_y = _stack(fold.train_ids, cache, labels)
        val_x, val_y = _stack(fold.val_ids, cache, labels)

        shuffler = torch.Generator().manual_seed(config.seed * 7_919 + fold.fold_index)
        model.train()
        for _ in range(config.epochs):
            order = torch.randperm(len(train_x), generator=shuffler)
            for start in range(0, len(order), config.batch_size):
                batch = order[start : start + config.batch_size]
                optimizer.zero_grad()
                loss = loss_fn(model(train_x[batch]), train_y[batch])
                if not torch.isfinite(loss):
                    raise TrainingDiverged(f"fold {fold.fold_index}: non-finite loss")
                loss.backward()
                optimizer.step()

        model.eval()
        with torch.no_grad():
            probs = torch.softmax(model(val_x), dim=1).numpy()
        preds = probs.argmax(axis=1)
        truth = val_y.numpy()
        for t, p in zip(truth, preds):
            confusion[t, p] += 1
        per_fold_accuracy.append(float((preds == truth).mean()))
        pooled_scores.append(probs)
        pooled_labels.append(truth)

    return report_from_confusion(
        classes,
        confusion,
        scores=np.concatenate(pooled_scores),
        labels=np.concatenate(pooled_labels),
        per_fold_accuracy=per_fold_accuracy,
    )
