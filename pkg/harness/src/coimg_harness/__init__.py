"""Toy-scale evaluation harness for original vs composite image datasets.

Consumes the generator's manifest files (dataset JSON, generation JSONL),
runs stratified 5-fold cross-validation with a small CNN, and reports the
full classification metric set including per-class error rates.
"""

__version__ = "0.1.0"

from coimg_harness.folds import FoldSplit, make_folds
from coimg_harness.metrics import MetricsReport, compare_runs, report_from_confusion
from coimg_harness.records import EvalRecord, load_records
from coimg_harness.runner import ModelConfig, train_and_eval

__all__ = [
    "__version__",
    "EvalRecord",
    "load_records",
    "FoldSplit",
    "make_folds",
    "MetricsReport",
    "report_from_confusion",
    "compare_runs",
    "ModelConfig",
    "train_and_eval",
]
