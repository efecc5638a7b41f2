"""L2-regularized logistic regression fit by full-batch gradient descent.

The objective is the sample-weighted negative log-likelihood plus a ridge
penalty on the weights (the bias is not penalized)::

    F(w, b) = sum_i c_i * logloss(sigmoid(w.x_i + b), t_i) + ||w||^2 / (2 C)

which is the scaling used by liblinear-style solvers with inverse
regularization strength ``C``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .data import Dataset, ProbEstimates, as_labels
from .errors import DimensionMismatch, LengthMismatch, SingleClassInput

PROB_CLIP = 1e-12

_ARMIJO_C1 = 1e-4
_BACKTRACK = 0.5
_MAX_BACKTRACKS = 60


@dataclass(frozen=True)
class FitConfig:
    max_iters: int = 500
    tolerance: float = 1e-6
    learning_rate: Union[float, str] = "auto"
    reg_inverse_c: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if not self.reg_inverse_c > 0:
            raise ValueError("reg_inverse_c must be > 0")
        if isinstance(self.learning_rate, str):
            if self.learning_rate != "auto":
                raise ValueError("learning_rate must be a positive number or 'auto'")
        elif not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")


@dataclass(frozen=True)
class LogisticModel:
    weights: np.ndarray
    bias: float
    reg_strength: float
    converged: bool = True
    iterations_used: int = 0
    objective_trace: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(w)) or not np.isfinite(self.bias):
            raise ValueError("model parameters must be finite")
        if not self.reg_strength > 0:
            raise ValueError("reg_strength must be > 0")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def reg_inverse_c(self) -> float:
        return 1.0 / self.reg_strength

    def to_dict(self) -> dict:
        return {
            "weights": [float(v) for v in self.weights],
            "bias": float(self.bias),
            "reg_inverse_c": self.reg_inverse_c,
            "converged": bool(self.converged),
            "iterations_used": int(self.iterations_used),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "LogisticModel":
        return cls(
            weights=np.asarray(obj["weights"], dtype=np.float64),
            bias=float(obj["bias"]),
            reg_strength=1.0 / float(obj["reg_inverse_c"]),
            converged=bool(obj.get("converged", True)),
            iterations_used=int(obj.get("iterations_used", 0)),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "LogisticModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _features(d) -> np.ndarray:
    if isinstance(d, Dataset):
        return d.features
    X = np.asarray(d, dtype=np.float64)
    return X.reshape(-1, 1) if X.ndim == 1 else X


def objective_and_gradient(params, X, t, c, reg_strength):
    """Objective value and gradient at ``params = [w..., b]``.

    ``t`` are 0/1 targets and ``c`` the per-example weights.
    """
    w, b = params[:-1], params[-1]
    z = X @ w + b
    # log(1 + e^z) - t z, stable for large |z|
    loss = np.logaddexp(0.0, z) - t * z
    f = float(c @ loss) + 0.5 * reg_strength * float(w @ w)
    r = c * (sigmoid(z) - t)
    grad = np.empty_like(params)
    grad[:-1] = X.T @ r + reg_strength * w
    grad[-1] = r.sum()
    return f, grad


def fit(
    d: Union[Dataset, np.ndarray],
    labels,
    weights=None,
    cfg: Optional[FitConfig] = None,
) -> LogisticModel:
    """Minimize the weighted, ridge-penalized log-loss.

    Non-convergence within ``cfg.max_iters`` is not an error; the returned
    model reports ``converged=False``.
    """
    cfg = cfg or FitConfig()
    X = _features(d)
    n, m = X.shape
    t = as_labels(labels).astype(np.float64)
    if t.shape[0] != n:
        raise LengthMismatch(f"{t.shape[0]} labels for {n} rows")
    if n == 0:
        raise SingleClassInput("cannot fit on an empty training set")
    if weights is None:
        c = np.ones(n)
    else:
        c = np.asarray(weights, dtype=np.float64).reshape(-1)
        if c.shape[0] != n:
            raise LengthMismatch(f"{c.shape[0]} sample weights for {n} rows")
        if np.any(c < 0) or not np.all(np.isfinite(c)):
            raise ValueError("sample weights must be finite and non-negative")
    pos = t == 1
    if pos.all() or not pos.any():
        raise SingleClassInput(f"labels are all {int(t[0])}; need both classes")
    if not (c[pos].sum() > 0 and c[~pos].sum() > 0):
        raise SingleClassInput("one class carries zero total sample weight")

    lam = 1.0 / cfg.reg_inverse_c
    params = np.zeros(m + 1)
    f, g = objective_and_gradient(params, X, t, c, lam)
    trace = [f]

    if cfg.learning_rate == "auto":
        # inverse of a Lipschitz bound on the gradient as the opening step
        row_sq = np.einsum("ij,ij->i", X, X) + 1.0
        step = 1.0 / (0.25 * float(c @ row_sq) + lam)
    else:
        step = float(cfg.learning_rate)

    steps = 0
    while np.max(np.abs(g)) > cfg.tolerance and steps < cfg.max_iters:
        gg = float(g @ g)
        alpha = step
        for _ in range(_MAX_BACKTRACKS):
            cand = params - alpha * g
            f_new, g_new = objective_and_gradient(cand, X, t, c, lam)
            if f_new <= f - _ARMIJO_C1 * alpha * gg and f_new < f:
                break
            alpha *= _BACKTRACK
        else:
            # stalled: the decrease is below the objective's rounding noise
            break
        s_vec = cand - params
        y_vec = g_new - g
        params, f, g = cand, f_new, g_new
        trace.append(f)
        steps += 1
        if cfg.learning_rate == "auto":
            sy = float(s_vec @ y_vec)
            # Barzilai-Borwein trial step for the next line search
            step = float(s_vec @ s_vec) / sy if sy > 0 else alpha * 2.0
    converged = bool(np.max(np.abs(g)) <= cfg.tolerance)

    return LogisticModel(
        weights=params[:-1].copy(),
        bias=float(params[-1]),
        reg_strength=lam,
        converged=converged,
        iterations_used=steps,
        objective_trace=tuple(trace),
    )


def decision_function(model: LogisticModel, d) -> np.ndarray:
    X = _features(d)
    if X.shape[1] != model.weights.shape[0]:
        raise DimensionMismatch(
            f"model expects {model.weights.shape[0]} features, got {X.shape[1]}"
        )
    return X @ model.weights + model.bias


def predict_proba(model: LogisticModel, d) -> ProbEstimates:
    """``g_i = sigmoid(w.x_i + b)`` clipped away from 0 and 1."""
    p = sigmoid(decision_function(model, d))
    return ProbEstimates(np.clip(p, PROB_CLIP, 1.0 - PROB_CLIP))


def predict(model: LogisticModel, d, threshold: float = 0.5) -> np.ndarray:
    return (predict_proba(model, d).g >= threshold).astype(np.int64)
