"""Proximity-aware mixup augmentation for group-fair tabular classification."""

from .classifiers import TrainedModel, TrainSpec, predict_labels, predict_score, predict_scores, train
from .data import (
    DatasetSchema,
    EncodedDataset,
    RawTable,
    SubgroupSelector,
    encode,
    load_csv,
    load_dataset,
    split,
    subgroup,
)
from .harness import ExperimentConfig, ExperimentResult, emit_reports, run_experiment
from .metrics import FairnessReport, full_report
from .mixing import STRATEGIES, MixConfig, MixedSample, SamplingStrategy, augment, generate, proximix_label
from .recourse import RecourseReport, find_counterfactual, group_recourse_report

__all__ = [
    "DatasetSchema", "EncodedDataset", "RawTable", "SubgroupSelector",
    "encode", "load_csv", "load_dataset", "split", "subgroup",
    "MixConfig", "MixedSample", "SamplingStrategy", "STRATEGIES", "augment", "generate", "proximix_label",
    "TrainSpec", "TrainedModel", "train", "predict_labels", "predict_score", "predict_scores",
    "FairnessReport", "full_report",
    "RecourseReport", "find_counterfactual", "group_recourse_report",
    "ExperimentConfig", "ExperimentResult", "emit_reports", "run_experiment",
]
