"""Out-of-sample probability estimates via k-fold cross-validation."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .classifier import FitConfig, fit, predict_proba
from .data import Dataset, ProbEstimates, as_labels
from .errors import LengthMismatch, SingleClassInput, TooFewExamples

log = logging.getLogger(__name__)

DEFAULT_FOLDS = 3


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: np.ndarray
    stratified: bool
    seed: int

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64).reshape(-1)
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if a.size and (a.min() < 0 or a.max() >= self.k):
            raise ValueError("fold indices must lie in [0, k)")
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    def train_test(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        held_out = self.assignment == j
        return np.flatnonzero(~held_out), np.flatnonzero(held_out)


def _deal(order: np.ndarray, k: int, out: np.ndarray, start: int = 0) -> int:
    out[order] = (np.arange(order.size) + start) % k
    return (start + order.size) % k


def make_folds(
    d: Dataset,
    k: int = DEFAULT_FOLDS,
    stratified: bool = True,
    seed: int = 0,
    labels=None,
) -> FoldPlan:
    """Random partition of ``range(n)`` into ``k`` folds of near-equal size.

    Indices are shuffled and then dealt round-robin, so fold sizes differ by
    at most one.  In stratified mode each class is dealt in turn, continuing
    the rotation, which keeps per-fold class counts within one of each other.
    Stratification needs at least ``k`` members of each class; otherwise the
    plan silently degrades to an unstratified one (logged).
    """
    n = d.n
    if k < 2:
        raise ValueError("k must be >= 2")
    if n < k:
        raise TooFewExamples(f"{n} examples cannot fill {k} folds")
    s = d.observed_labels if labels is None else as_labels(labels)
    if s.shape[0] != n:
        raise LengthMismatch(f"{s.shape[0]} labels for {n} rows")

    rng = np.random.default_rng(seed)
    assignment = np.empty(n, dtype=np.int64)
    if stratified:
        counts = np.bincount(s, minlength=2)
        if counts.min() < k:
            log.warning(
                "stratified %d-fold split needs %d of each class, have %s; "
                "falling back to unstratified",
                k, k, counts.tolist(),
            )
            stratified = False
    if stratified:
        nxt = 0
        for cls in (1, 0):
            members = np.flatnonzero(s == cls)
            nxt = _deal(rng.permutation(members), k, assignment, nxt)
    else:
        _deal(rng.permutation(n), k, assignment)
    return FoldPlan(k=k, assignment=assignment, stratified=stratified, seed=seed)


def _run_folds(X, s, plan: FoldPlan, cfg: FitConfig) -> np.ndarray:
    g = np.empty(s.shape[0])
    for j in range(plan.k):
        train, test = plan.train_test(j)
        if test.size == 0:
            continue
        model = fit(X[train], s[train], cfg=cfg)
        g[test] = predict_proba(model, X[test]).g
    return g


def cv_predict_proba(
    d: Dataset,
    labels=None,
    plan: Optional[FoldPlan] = None,
    cfg: Optional[FitConfig] = None,
) -> ProbEstimates:
    """Cross-validated ``g(x) = P(s_hat=1 | x)``.

    Every ``g_i`` comes from a model fit without example ``i``.  If an
    unstratified plan produces a single-class training split, the folds are
    redrawn once with stratification forced before giving up.
    """
    cfg = cfg or FitConfig()
    s = d.observed_labels if labels is None else as_labels(labels)
    if s.shape[0] != d.n:
        raise LengthMismatch(f"{s.shape[0]} labels for {d.n} rows")
    if plan is None:
        plan = make_folds(d, DEFAULT_FOLDS, True, cfg.seed, labels=s)
    if plan.assignment.shape[0] != d.n:
        raise LengthMismatch("fold plan does not match dataset size")

    try:
        g = _run_folds(d.features, s, plan, cfg)
    except SingleClassInput:
        if plan.stratified:
            raise
        log.warning("single-class training split; retrying with stratified folds")
        plan = make_folds(d, plan.k, True, plan.seed, labels=s)
        if not plan.stratified:
            raise
        g = _run_folds(d.features, s, plan, cfg)
    return ProbEstimates(g, plan.assignment)
