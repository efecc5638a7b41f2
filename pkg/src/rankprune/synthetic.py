"""Gaussian benchmark: data generation, label corruption, metrics and sweeps.

Negatives are drawn from ``N(0, I)`` and positives from ``N(d*1, 0.8 I)`` in
``dim`` dimensions.  A fraction of the training set can be replaced by
examples drawn uniformly from ``[-10, 10]^dim`` with coin-flip labels.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .classifier import FitConfig, fit, predict_proba
from .crossval import DEFAULT_FOLDS
from .data import Dataset, NoiseRates, ProbEstimates, as_labels, complete_rates, rates_from_pi1_rho1
from .errors import (
    InfeasibleConfig,
    InvalidRates,
    LengthMismatch,
    MissingHiddenLabels,
    RankPruneError,
)
from .pruning import estimate_from_data, fit_pruned
from .records import ExperimentRecord

log = logging.getLogger(__name__)

POS_VARIANCE = 0.8
NOISE_BOX = 10.0
AXES = ("d", "dim", "n", "noise_frac")
METHODS = ("RP", "RP_rho", "naive", "truth")
DEFAULT_PAIRS = ((0.0, 0.0), (0.0, 0.5), (0.25, 0.25), (0.5, 0.0), (0.5, 0.5))


@dataclass(frozen=True)
class SynthConfig:
    d: float = 4.0
    dim: int = 2
    n: int = 5000
    p_y1: float = 0.2
    noise_frac: float = 0.0
    pi1: float = 0.0
    rho1: float = 0.0
    trials: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n < 0 or self.trials < 0 or self.dim < 1:
            raise InfeasibleConfig("n and trials must be >= 0 and dim >= 1")
        if not (0.0 < self.p_y1 < 1.0):
            raise InfeasibleConfig(f"p_y1={self.p_y1} outside (0, 1)")
        if not (0.0 <= self.noise_frac < 1.0):
            raise InfeasibleConfig(f"noise_frac={self.noise_frac} outside [0, 1)")
        self.noise_rates()

    def noise_rates(self) -> NoiseRates:
        """Rates implied by ``(pi1, rho1)`` at the generator's prior."""
        try:
            return rates_from_pi1_rho1(self.pi1, self.rho1, self.p_y1)
        except InvalidRates as exc:
            raise InfeasibleConfig(str(exc)) from None

    def replace(self, **changes) -> "SynthConfig":
        return dataclasses.replace(self, **changes)


def generate(cfg: SynthConfig, rng: np.random.Generator) -> Dataset:
    """Clean dataset (observed labels equal hidden labels) with noise-origin flags."""
    n, m = cfg.n, cfg.dim
    n_noise = int(math.floor(cfg.noise_frac * n))
    n_signal = n - n_noise
    n_pos = int(round(cfg.p_y1 * n_signal))
    X = np.empty((n, m))
    y = np.zeros(n, dtype=np.int64)
    X[:n_pos] = rng.normal(cfg.d, math.sqrt(POS_VARIANCE), size=(n_pos, m))
    y[:n_pos] = 1
    X[n_pos:n_signal] = rng.normal(0.0, 1.0, size=(n_signal - n_pos, m))
    X[n_signal:] = rng.uniform(-NOISE_BOX, NOISE_BOX, size=(n_noise, m))
    y[n_signal:] = rng.integers(0, 2, size=n_noise)
    noise = np.zeros(n, dtype=bool)
    noise[n_signal:] = True
    order = rng.permutation(n)
    return Dataset(X[order], y[order], y[order], noise[order])


@dataclass(frozen=True)
class Corruption:
    s: np.ndarray
    flips_pos: int
    flips_neg: int
    n_pos: int
    n_neg: int

    @property
    def realized_rho1(self) -> float:
        return self.flips_pos / self.n_pos if self.n_pos else 0.0

    @property
    def realized_rho0(self) -> float:
        return self.flips_neg / self.n_neg if self.n_neg else 0.0


def corrupt(y, rho1: float, rho0: float, rng: np.random.Generator) -> Corruption:
    """Flip each positive with probability ``rho1`` and each negative with ``rho0``."""
    if not (0.0 <= rho1 < 1.0 and 0.0 <= rho0 < 1.0) or rho1 + rho0 >= 1.0:
        raise InvalidRates(f"need 0 <= rho < 1 and rho1 + rho0 < 1, got ({rho1}, {rho0})")
    y = as_labels(y)
    u = rng.random(y.shape[0])
    pos = y == 1
    flip = np.where(pos, u < rho1, u < rho0)
    s = np.where(flip, 1 - y, y)
    return Corruption(
        s=s,
        flips_pos=int(np.count_nonzero(flip & pos)),
        flips_neg=int(np.count_nonzero(flip & ~pos)),
        n_pos=int(pos.sum()),
        n_neg=int((~pos).sum()),
    )


def ideal_g(d: Dataset, rho1: float, rho0: float) -> ProbEstimates:
    """Two-valued oracle ``g``: ``1 - rho1`` on true positives, ``rho0`` on negatives."""
    if d.hidden_labels is None:
        raise MissingHiddenLabels("ideal_g needs hidden labels")
    return ProbEstimates(np.where(d.hidden_labels == 1, 1.0 - rho1, rho0))


def posterior_positive(X, cfg: SynthConfig) -> np.ndarray:
    """Bayes ``P(y=1 | x)`` for the two-Gaussian generator (added noise ignored)."""
    X = np.asarray(X, dtype=np.float64)
    m = X.shape[1]
    log_f1 = -0.5 * np.sum((X - cfg.d) ** 2, axis=1) / POS_VARIANCE - 0.5 * m * math.log(POS_VARIANCE)
    log_f0 = -0.5 * np.sum(X**2, axis=1)
    a = math.log(cfg.p_y1) + log_f1
    b = math.log(1.0 - cfg.p_y1) + log_f0
    return np.exp(a - np.logaddexp(a, b))


def bayes_overlap(X, y, cfg: SynthConfig) -> float:
    """Empirical ``P(y_hat=1, y=0)`` under the Bayes-posterior classifier."""
    y = as_labels(y)
    post = posterior_positive(X, cfg)
    return float(np.sum(post[y == 0]) / y.shape[0]) if y.size else 0.0


@dataclass(frozen=True)
class Metrics:
    f1: float
    error: float
    auc_pr: Optional[float]


def average_precision(scores, truth) -> float:
    """Area under the precision-recall step curve.

    Sum over distinct score thresholds (descending) of the recall gained
    times the precision at that threshold; tied scores form one step.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truth = as_labels(truth)
    n_pos = int(truth.sum())
    if n_pos == 0:
        return 0.0
    order = np.argsort(-scores, kind="mergesort")
    sc, tr = scores[order], truth[order]
    tp = np.cumsum(tr)
    # last index of each block of equal scores
    ends = np.r_[np.flatnonzero(np.diff(sc) != 0), sc.size - 1]
    tp_at = tp[ends]
    precision = tp_at / (ends + 1)
    recall_gain = np.diff(np.r_[0, tp_at]) / n_pos
    return float(np.sum(recall_gain * precision))


def evaluate(pred, truth, scores=None) -> Metrics:
    pred = as_labels(pred, "predictions")
    truth = as_labels(truth, "truth")
    if pred.shape != truth.shape:
        raise LengthMismatch(f"{pred.shape[0]} predictions for {truth.shape[0]} labels")
    n = truth.shape[0]
    tp = int(np.count_nonzero((pred == 1) & (truth == 1)))
    fp = int(np.count_nonzero((pred == 1) & (truth == 0)))
    fn = int(np.count_nonzero((pred == 0) & (truth == 1)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    error = (fp + fn) / n if n else 0.0
    auc = None
    if scores is not None:
        scores = np.asarray(scores, dtype=np.float64)
        if scores.shape != truth.shape:
            raise LengthMismatch("scores must align with truth")
        auc = average_precision(scores, truth)
    return Metrics(f1=f1, error=error, auc_pr=auc)


def trial_rng(master_seed: int, key: Sequence[int]) -> tuple[np.random.Generator, int]:
    """Independent stream for one ``(axis value, pair, trial)`` cell and its seed tag."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(int(k) for k in key))
    tag = int(ss.generate_state(1, dtype=np.uint32)[0])
    return np.random.default_rng(ss), tag


@dataclass(frozen=True)
class TrialSpec:
    axis: str
    axis_value: float
    axis_index: int
    pair_index: int
    trial: int
    cfg: SynthConfig
    methods: tuple
    fit_cfg: FitConfig
    cv_k: int


def run_trial(spec: TrialSpec) -> list[ExperimentRecord]:
    cfg = spec.cfg
    rng, tag = trial_rng(cfg.seed, (spec.axis_index, spec.pair_index, spec.trial))
    nominal = cfg.noise_rates()
    train = generate(cfg, rng)
    cor = corrupt(train.hidden_labels, nominal.rho1, nominal.rho0, rng)
    train = train.with_observed(cor.s)
    test = generate(cfg.replace(noise_frac=0.0), rng)

    base = dict(
        axis=spec.axis,
        axis_value=spec.axis_value,
        pi1=cfg.pi1,
        rho1=cfg.rho1,
        trial=spec.trial,
        seed=tag,
        d=cfg.d,
        dim=cfg.dim,
        n=cfg.n,
        p_y1=cfg.p_y1,
        noise_frac=cfg.noise_frac,
        rho1_real=cor.realized_rho1,
        rho0_real=cor.realized_rho0,
    )
    fit_cfg = spec.fit_cfg
    records = []
    est = None
    est_error = None
    if {"RP", "RP_rho"} & set(spec.methods):
        try:
            est = estimate_from_data(train, fit_cfg, spec.cv_k, tag % (2**31))
        except RankPruneError as exc:
            est_error = f"{type(exc).__name__}: {exc}"

    for method in spec.methods:
        t0 = time.perf_counter()
        rec = dict(base, method=method)
        try:
            if method == "truth":
                model = fit(train, train.hidden_labels, cfg=fit_cfg)
            elif method == "naive":
                model = fit(train, train.observed_labels, cfg=fit_cfg)
            else:
                if est is None:
                    raise _TrialFailure(est_error)
                rec.update(
                    rho1_hat=est.rho1_conf,
                    rho0_hat=est.rho0_conf,
                )
                if method == "RP":
                    rates = nominal
                else:
                    rates = complete_rates(est.rho1_conf, est.rho0_conf, est.p_s1)
                rec.update(pi1_hat=rates.pi1, pi0_hat=rates.pi0)
                model, _ = fit_pruned(train, est.g, rates, fit_cfg)
            g_test = predict_proba(model, test).g
            met = evaluate((g_test >= 0.5).astype(np.int64), test.hidden_labels, g_test)
            rec.update(f1=met.f1, error=met.error, auc_pr=met.auc_pr, status="ok")
        except (RankPruneError, _TrialFailure) as exc:
            msg = str(exc) if isinstance(exc, _TrialFailure) else f"{type(exc).__name__}: {exc}"
            rec.update(status=msg)
        rec["wall_ms"] = (time.perf_counter() - t0) * 1000.0
        records.append(ExperimentRecord(**rec))
    return records


class _TrialFailure(Exception):
    pass


def plan_sweep(
    axis: str,
    values: Iterable[float],
    pairs: Iterable[tuple[float, float]],
    cfg: SynthConfig,
    methods: Iterable[str] = METHODS,
    fit_cfg: Optional[FitConfig] = None,
    cv_k: int = DEFAULT_FOLDS,
) -> list[TrialSpec]:
    """Expand a sweep into trial specs, validating every cell up front."""
    if axis not in AXES:
        raise InfeasibleConfig(f"axis must be one of {AXES}, got {axis!r}")
    values = list(values)
    pairs = [tuple(p) for p in pairs]
    methods = tuple(methods)
    if not values:
        raise InfeasibleConfig("sweep needs at least one axis value")
    if not pairs:
        raise InfeasibleConfig("sweep needs at least one (pi1, rho1) pair")
    unknown = set(methods) - set(METHODS)
    if not methods or unknown:
        raise InfeasibleConfig(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
    fit_cfg = fit_cfg or FitConfig()
    specs = []
    for ai, v in enumerate(values):
        if axis in ("dim", "n"):
            if float(v) != int(v):
                raise InfeasibleConfig(f"{axis} must be an integer, got {v}")
            v = int(v)
        else:
            v = float(v)
        for pj, (pi1, rho1) in enumerate(pairs):
            cell = cfg.replace(**{axis: v, "pi1": float(pi1), "rho1": float(rho1)})
            for t in range(cfg.trials):
                specs.append(TrialSpec(axis, v, ai, pj, t, cell, methods, fit_cfg, cv_k))
    return specs


def run_sweep(
    axis: str,
    values: Iterable[float],
    pairs: Iterable[tuple[float, float]],
    cfg: SynthConfig,
    methods: Iterable[str] = METHODS,
    fit_cfg: Optional[FitConfig] = None,
    cv_k: int = DEFAULT_FOLDS,
    workers: int = 1,
) -> list[ExperimentRecord]:
    """One record per (axis value, pair, trial, method), in that key order.

    Each cell draws from its own seed stream, so the output does not depend
    on ``workers``.
    """
    specs = plan_sweep(axis, values, pairs, cfg, methods, fit_cfg, cv_k)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_trial, specs))
    else:
        chunks = [run_trial(s) for s in specs]
    out = []
    for spec, recs in zip(specs, chunks):
        out.extend(recs)
    return out
