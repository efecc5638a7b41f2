"""Rank-based pruning of inconsistent examples and the reweighted refit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .classifier import FitConfig, LogisticModel, fit
from .crossval import DEFAULT_FOLDS, cv_predict_proba, make_folds
from .data import (
    Dataset,
    NoiseRates,
    ProbEstimates,
    Thresholds,
    as_labels,
    complete_rates,
)
from .errors import EmptyClass, LengthMismatch, OverPrune, RankOutOfRange
from .noise import ConfidentCounts, estimate_noise

_SMALL = 32
# absorbs float error in pi * |set| when pi is an exact count ratio
_COUNT_SLACK = 1e-9


def _median_of_medians(a: np.ndarray) -> float:
    full = a.size - a.size % 5
    medians = np.sort(a[:full].reshape(-1, 5), axis=1)[:, 2]
    if full < a.size:
        tail = np.sort(a[full:])
        medians = np.append(medians, tail[(tail.size - 1) // 2])
    return _select(medians, (medians.size - 1) // 2)


def _select(a: np.ndarray, k: int) -> float:
    # k is 0-based; three-way partition so duplicate-heavy input still shrinks
    while True:
        if a.size <= _SMALL:
            return float(np.sort(a)[k])
        pivot = _median_of_medians(a)
        lower = a[a < pivot]
        if k < lower.size:
            a = lower
            continue
        n_equal = int(np.count_nonzero(a == pivot))
        if k < lower.size + n_equal:
            return float(pivot)
        k -= lower.size + n_equal
        a = a[a > pivot]


def select_kth(values, k: int, direction: str = "smallest") -> float:
    """The ``k``-th (1-based) smallest or largest entry of ``values``.

    Median-of-medians pivoting gives worst-case linear time; only groups of
    five (and the final handful of survivors) are ever sorted.
    """
    a = np.asarray(values, dtype=np.float64).reshape(-1)
    n = a.size
    if not 1 <= k <= n:
        raise RankOutOfRange(f"rank {k} outside 1..{n}")
    if not np.all(np.isfinite(a)):
        raise ValueError("values must be finite")
    if direction == "smallest":
        return _select(a, k - 1)
    if direction == "largest":
        return _select(a, n - k)
    raise ValueError(f"direction must be 'smallest' or 'largest', got {direction!r}")


@dataclass(frozen=True)
class PruneResult:
    kept_indices: np.ndarray
    weights: np.ndarray
    k1_threshold: float
    k0_threshold: float
    removed_pos: int
    removed_neg: int
    target_removed_pos: int
    target_removed_neg: int

    def to_dict(self) -> dict:
        return {
            "kept_indices": [int(i) for i in self.kept_indices],
            "weights": [float(w) for w in self.weights],
            "k1_threshold": self.k1_threshold,
            "k0_threshold": self.k0_threshold,
            "removed_pos": self.removed_pos,
            "removed_neg": self.removed_neg,
            "target_removed_pos": self.target_removed_pos,
            "target_removed_neg": self.target_removed_neg,
        }


def removal_count(rate: float, size: int) -> int:
    return int(math.floor(rate * size + _COUNT_SLACK))


def prune(g, s, rates: NoiseRates) -> PruneResult:
    """Drop the ``pi1 |P~|`` lowest-``g`` positives and ``pi0 |N~|`` highest-``g`` negatives.

    ``k1`` is the smallest ``g`` that survives among observed positives and
    ``k0`` the largest among observed negatives; every example on the kept
    side of its cut is retained, so ties at a cut can keep extra examples.
    """
    gv = g.g if isinstance(g, ProbEstimates) else np.asarray(g, dtype=np.float64)
    s = as_labels(s)
    if gv.shape != s.shape:
        raise LengthMismatch(f"g has {gv.shape[0]} entries, labels {s.shape[0]}")
    pos = np.flatnonzero(s == 1)
    neg = np.flatnonzero(s == 0)
    r1 = removal_count(rates.pi1, pos.size)
    r0 = removal_count(rates.pi0, neg.size)
    if r1 >= pos.size or r0 >= neg.size:
        raise OverPrune(
            f"would remove {r1}/{pos.size} positives and {r0}/{neg.size} negatives"
        )

    k1 = select_kth(gv[pos], r1 + 1, "smallest")
    k0 = select_kth(gv[neg], r0 + 1, "largest")
    kept_pos = pos[gv[pos] >= k1]
    kept_neg = neg[gv[neg] <= k0]
    kept = np.sort(np.concatenate([kept_pos, kept_neg]))
    w = np.where(s[kept] == 1, 1.0 / (1.0 - rates.rho1), 1.0 / (1.0 - rates.rho0))
    return PruneResult(
        kept_indices=kept,
        weights=w,
        k1_threshold=k1,
        k0_threshold=k0,
        removed_pos=int(pos.size - kept_pos.size),
        removed_neg=int(neg.size - kept_neg.size),
        target_removed_pos=r1,
        target_removed_neg=r0,
    )


@dataclass(frozen=True)
class NoiseEstimate:
    """Everything computed on the way from ``(X, s)`` to the noise rates."""

    g: ProbEstimates
    p_s1: float
    thresholds: Optional[Thresholds]
    counts: Optional[ConfidentCounts]
    rho1_conf: Optional[float]
    rho0_conf: Optional[float]


class RankPruneFit(NamedTuple):
    model: LogisticModel
    rates: NoiseRates
    prune: PruneResult
    estimate: NoiseEstimate


def estimate_from_data(
    d: Dataset,
    cfg: Optional[FitConfig] = None,
    cv_k: int = DEFAULT_FOLDS,
    seed: int = 0,
    stratified: bool = True,
    with_counts: bool = True,
) -> NoiseEstimate:
    """Cross-validated ``g`` followed by the confident-counts estimate."""
    cfg = cfg or FitConfig(seed=seed)
    s = d.observed_labels
    n_pos = int(s.sum())
    if n_pos == 0 or n_pos == s.size:
        raise EmptyClass("both observed classes must be present")
    plan = make_folds(d, cv_k, stratified, seed)
    g = cv_predict_proba(d, s, plan, cfg)
    p_s1 = n_pos / s.size
    if not with_counts:
        return NoiseEstimate(g, p_s1, None, None, None, None)
    t, c, rho1, rho0 = estimate_noise(g, s)
    return NoiseEstimate(g, p_s1, t, c, rho1, rho0)


def fit_pruned(
    d: Dataset, g, rates: NoiseRates, cfg: Optional[FitConfig] = None
) -> tuple[LogisticModel, PruneResult]:
    """Prune ``d`` by ``g`` at the given rates and fit on what remains."""
    pr = prune(g, d.observed_labels, rates)
    kept = pr.kept_indices
    model = fit(d.features[kept], d.observed_labels[kept], pr.weights, cfg)
    return model, pr


def rank_prune_fit(
    d: Dataset,
    cfg: Optional[FitConfig] = None,
    cv_k: int = DEFAULT_FOLDS,
    seed: int = 0,
    rates_override: Optional[NoiseRates] = None,
    stratified: bool = True,
) -> RankPruneFit:
    """Estimate noise rates, prune by rank, and refit with class weights.

    With ``rates_override`` the given rates replace the estimated ones (the
    "rates known" variant); ``g`` is still computed because pruning ranks by it.
    """
    cfg = cfg or FitConfig(seed=seed)
    est = estimate_from_data(
        d, cfg, cv_k, seed, stratified, with_counts=rates_override is None
    )
    if rates_override is None:
        rates = complete_rates(est.rho1_conf, est.rho0_conf, est.p_s1)
    else:
        rates = rates_override
    model, pr = fit_pruned(d, est.g, rates, cfg)
    return RankPruneFit(model, rates, pr, est)

