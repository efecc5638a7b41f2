"""Rank Pruning for binary classification with noisy labels.

Estimate class-conditional label-noise rates from out-of-sample predicted
probabilities, prune the least confident examples of each observed class by
rank, and refit with a class-reweighted loss.
"""

__version__ = "0.1.0"

from .classifier import FitConfig, LogisticModel, fit, predict, predict_proba
from .crossval import FoldPlan, cv_predict_proba, make_folds
from .data import (
    Dataset,
    NoiseRates,
    ProbEstimates,
    Thresholds,
    complete_rates,
    rates_from_pi1_rho1,
    read_dataset_csv,
    split_by_observed_label,
    write_dataset_csv,
)
from .noise import (
    ConfidentCounts,
    TheoryInputs,
    confident_counts,
    estimate_noise,
    estimate_rates,
    theoretical_rates,
    thresholds,
)
from .pruning import PruneResult, fit_pruned, prune, rank_prune_fit, select_kth

__all__ = [
    "ConfidentCounts",
    "Dataset",
    "FitConfig",
    "FoldPlan",
    "LogisticModel",
    "NoiseRates",
    "ProbEstimates",
    "PruneResult",
    "TheoryInputs",
    "Thresholds",
    "complete_rates",
    "confident_counts",
    "cv_predict_proba",
    "estimate_noise",
    "estimate_rates",
    "fit",
    "fit_pruned",
    "make_folds",
    "predict",
    "predict_proba",
    "prune",
    "rank_prune_fit",
    "rates_from_pi1_rho1",
    "read_dataset_csv",
    "select_kth",
    "split_by_observed_label",
    "theoretical_rates",
    "thresholds",
    "write_dataset_csv",
]
