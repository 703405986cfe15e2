"""Frequency-based predictive entropy and split conformal prediction for multiple-choice QA."""

import json

from ._core import (
    CmcqaError,
    ExperimentConfig,
    FrequencyDistribution,
    QuestionRecord,
    __version__,
    auroc,
    conformal_quantile,
    estimate_frequencies,
    generate_dataset,
    load_jsonl,
    normalize_sample,
    prediction_set,
    predictive_entropy,
    quantile_rank,
    run_cli,
    softmax,
)
from . import _core


def run_experiment(records, config=None, dataset_id="dataset"):
    """Repeated-split EMR/APSS/AUROC evaluation; one report dict per group."""
    return json.loads(_core._run_experiment(records, config or ExperimentConfig(), dataset_id))


def compare_sources(records, config=None, dataset_id="dataset"):
    """AUROC of frequency-based vs logit-based entropy over shared partitions."""
    return json.loads(_core._compare_sources(records, config or ExperimentConfig(), dataset_id))


__all__ = [
    "CmcqaError",
    "ExperimentConfig",
    "FrequencyDistribution",
    "QuestionRecord",
    "__version__",
    "auroc",
    "compare_sources",
    "conformal_quantile",
    "estimate_frequencies",
    "generate_dataset",
    "load_jsonl",
    "normalize_sample",
    "prediction_set",
    "predictive_entropy",
    "quantile_rank",
    "run_cli",
    "run_experiment",
    "softmax",
]
