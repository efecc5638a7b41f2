"""Core immutable types: datasets, noise-rate bundles, probability vectors.

Conventions used throughout the package:

* ``s`` is the observed (possibly corrupted) label vector, ``y`` the hidden
  true label vector.  Both are integer arrays holding only 0 and 1.
* ``rho1 = P(s=0 | y=1)`` and ``rho0 = P(s=1 | y=0)`` are the noise rates.
* ``pi1 = P(y=0 | s=1)`` and ``pi0 = P(y=1 | s=0)`` are the inverse noise rates.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DatasetParseError, InvalidRates, LengthMismatch

RATE_CEILING = 0.9999
DENOMINATOR_GUARD = 1e-6


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def as_labels(values, name: str = "labels") -> np.ndarray:
    """Coerce ``values`` to a 1-D int64 vector of 0/1, raising on anything else."""
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        return np.zeros(0, dtype=np.int64)
    if arr.dtype == bool:
        return arr.astype(np.int64)
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int64)


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with observed labels and, in benchmark mode, hidden labels.

    ``noise_origin`` marks examples drawn from the added uniform-noise
    distribution rather than from either class; it is metadata only.
    """

    features: np.ndarray
    observed_labels: np.ndarray
    hidden_labels: Optional[np.ndarray] = None
    noise_origin: Optional[np.ndarray] = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise ValueError(f"features must be a 2-D matrix, got shape {X.shape}")
        s = as_labels(self.observed_labels, "observed_labels")
        n = X.shape[0]
        if s.shape[0] != n:
            raise LengthMismatch(f"{s.shape[0]} labels for {n} feature rows")
        if n > 0 and X.shape[1] < 1:
            raise ValueError("a non-empty dataset needs at least one feature column")
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "observed_labels", _frozen(s))
        if self.hidden_labels is not None:
            y = as_labels(self.hidden_labels, "hidden_labels")
            if y.shape[0] != n:
                raise LengthMismatch(f"{y.shape[0]} hidden labels for {n} rows")
            object.__setattr__(self, "hidden_labels", _frozen(y))
        if self.noise_origin is not None:
            mask = np.asarray(self.noise_origin, dtype=bool)
            if mask.shape != (n,):
                raise LengthMismatch(f"noise_origin has shape {mask.shape}, expected ({n},)")
            object.__setattr__(self, "noise_origin", _frozen(mask))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.n

    def with_observed(self, s) -> "Dataset":
        """Copy of this dataset with the observed labels replaced."""
        return Dataset(self.features, s, self.hidden_labels, self.noise_origin)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(
            self.features[idx],
            self.observed_labels[idx],
            None if self.hidden_labels is None else self.hidden_labels[idx],
            None if self.noise_origin is None else self.noise_origin[idx],
        )


def split_by_observed_label(d: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Index sets of observed positives and observed negatives, both sorted."""
    s = d.observed_labels
    return np.flatnonzero(s == 1), np.flatnonzero(s == 0)


@dataclass(frozen=True)
class NoiseRates:
    rho1: float
    rho0: float
    pi1: float
    pi0: float
    p_s1: float
    p_y1: float
    clamped: bool = False

    def __post_init__(self):
        for name in ("rho1", "rho0", "pi1", "pi0"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise InvalidRates(f"{name}={v} outside [0, 1)")
        for name in ("p_s1", "p_y1"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise InvalidRates(f"{name}={v} outside (0, 1)")
        if self.rho1 + self.rho0 >= 1.0:
            raise InvalidRates(f"rho1 + rho0 = {self.rho1 + self.rho0} >= 1")
        if not self.clamped:
            pi1 = self.rho0 * (1 - self.p_y1) / self.p_s1
            pi0 = self.rho1 * self.p_y1 / (1 - self.p_s1)
            if abs(pi1 - self.pi1) > 1e-9 or abs(pi0 - self.pi0) > 1e-9:
                raise InvalidRates("inverse noise rates inconsistent with rho and priors")

    def as_dict(self) -> dict:
        return {
            "rho1": self.rho1,
            "rho0": self.rho0,
            "pi1": self.pi1,
            "pi0": self.pi0,
            "p_s1": self.p_s1,
            "p_y1": self.p_y1,
            "clamped": self.clamped,
        }


def complete_rates(rho1: float, rho0: float, p_s1: float) -> NoiseRates:
    """Derive ``pi1``, ``pi0`` and ``p_y1`` from a noise-rate pair and ``P(s=1)``.

    Estimated rates can be inconsistent with ``p_s1`` (for instance an
    over-estimated ``rho0`` larger than ``p_s1``), which would make the
    derived quantities negative.  Those are clamped into ``[0, 0.9999]``
    and the result carries ``clamped=True``.
    """
    rho1 = float(rho1)
    rho0 = float(rho0)
    p_s1 = float(p_s1)
    if not (0.0 < p_s1 < 1.0):
        raise InvalidRates(f"p_s1={p_s1} outside (0, 1)")
    if not (0.0 <= rho1 < 1.0 and 0.0 <= rho0 < 1.0):
        raise InvalidRates(f"rates ({rho1}, {rho0}) outside [0, 1)")
    denom = 1.0 - rho1 - rho0
    if denom <= DENOMINATOR_GUARD:
        raise InvalidRates(f"rho1 + rho0 = {rho1 + rho0} too close to or above 1")

    pi1 = (rho0 / p_s1) * (1.0 - p_s1 - rho1) / denom
    pi0 = (rho1 / (1.0 - p_s1)) * (p_s1 - rho0) / denom
    p_y1 = (p_s1 - rho0) / denom

    clamped = False
    lo_prior, hi_prior = 1.0 - RATE_CEILING, RATE_CEILING
    if not (0.0 <= pi1 <= RATE_CEILING):
        pi1, clamped = min(max(pi1, 0.0), RATE_CEILING), True
    if not (0.0 <= pi0 <= RATE_CEILING):
        pi0, clamped = min(max(pi0, 0.0), RATE_CEILING), True
    if not (lo_prior <= p_y1 <= hi_prior):
        p_y1, clamped = min(max(p_y1, lo_prior), hi_prior), True
    return NoiseRates(rho1, rho0, pi1, pi0, p_s1, p_y1, clamped=clamped)


def rates_from_pi1_rho1(pi1: float, rho1: float, p_y1: float) -> NoiseRates:
    """Complete the rates from the ``(pi1, rho1)`` pair and the true prior.

    Used by the synthetic benchmark, which is parameterized by the fraction of
    observed positives that are really negative.  Raises ``InvalidRates`` when
    the pair admits no valid ``rho0``.
    """
    if not (0.0 < p_y1 < 1.0):
        raise InvalidRates(f"p_y1={p_y1} outside (0, 1)")
    if not (0.0 <= pi1 < 1.0 and 0.0 <= rho1 < 1.0):
        raise InvalidRates(f"(pi1, rho1)=({pi1}, {rho1}) outside [0, 1)")
    # |PP| / |P~| = 1 - pi1 and |PP| = (1 - rho1) |P|
    p_s1 = (1.0 - rho1) * p_y1 / (1.0 - pi1)
    if not (0.0 < p_s1 < 1.0):
        raise InvalidRates(f"(pi1, rho1)=({pi1}, {rho1}) implies P(s=1)={p_s1}")
    rho0 = pi1 * p_s1 / (1.0 - p_y1)
    if rho0 >= 1.0 or rho1 + rho0 >= 1.0:
        raise InvalidRates(f"(pi1, rho1)=({pi1}, {rho1}) implies rho0={rho0}")
    pi0 = rho1 * p_y1 / (1.0 - p_s1)
    return NoiseRates(rho1, rho0, pi1, pi0, p_s1, p_y1)


@dataclass(frozen=True)
class ProbEstimates:
    """Out-of-sample ``g(x) = P(s_hat=1 | x)`` with the fold that produced each value."""

    g: np.ndarray
    fold_of: np.ndarray = field(default=None)

    def __post_init__(self):
        g = np.asarray(self.g, dtype=np.float64).reshape(-1)
        if g.size and (np.any(~np.isfinite(g)) or g.min() < 0.0 or g.max() > 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        fold_of = self.fold_of
        if fold_of is None:
            fold_of = np.zeros(g.shape[0], dtype=np.int64)
        fold_of = np.asarray(fold_of, dtype=np.int64).reshape(-1)
        if fold_of.shape != g.shape:
            raise LengthMismatch("fold_of must align with g")
        if fold_of.size and fold_of.min() < 0:
            raise ValueError("fold indices must be non-negative")
        object.__setattr__(self, "g", _frozen(g))
        object.__setattr__(self, "fold_of", _frozen(fold_of))

    def __len__(self) -> int:
        return self.g.shape[0]


@dataclass(frozen=True)
class Thresholds:
    lb_y1: float
    ub_y0: float

    def __post_init__(self):
        for name in ("lb_y1", "ub_y0"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v} outside [0, 1]")


def _parse_label(token: str, row: int, col: str) -> int:
    token = token.strip()
    if token == "0":
        return 0
    if token == "1":
        return 1
    raise DatasetParseError(f"row {row}: column {col!r} must be 0 or 1, got {token!r}")


def read_dataset_csv(path) -> Dataset:
    """Read ``f0,...,f{m-1},s[,y]`` with a header row."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DatasetParseError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetParseError(f"{path} is empty") from None
        has_y = bool(header) and header[-1] == "y"
        n_feat = len(header) - (2 if has_y else 1)
        expected = [f"f{j}" for j in range(n_feat)] + ["s"] + (["y"] if has_y else [])
        if n_feat < 1 or header != expected:
            raise DatasetParseError(
                f"bad header {header!r}; expected f0,...,f{{m-1}},s[,y]"
            )
        rows, s, y = [], [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not t.strip() for t in rec):
                continue
            if len(rec) != len(header):
                raise DatasetParseError(
                    f"row {lineno}: {len(rec)} fields, expected {len(header)}"
                )
            try:
                feats = [float(t) for t in rec[:n_feat]]
            except ValueError as exc:
                raise DatasetParseError(f"row {lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in feats):
                raise DatasetParseError(f"row {lineno}: non-finite feature")
            rows.append(feats)
            s.append(_parse_label(rec[n_feat], lineno, "s"))
            if has_y:
                y.append(_parse_label(rec[n_feat + 1], lineno, "y"))
    X = np.array(rows, dtype=np.float64).reshape(len(rows), n_feat)
    return Dataset(X, np.array(s, dtype=np.int64), np.array(y, dtype=np.int64) if has_y else None)


def write_dataset_csv(d: Dataset, path, include_hidden: bool = True) -> None:
    """Write a dataset so that ``read_dataset_csv`` returns it bit-exactly."""
    with_y = include_hidden and d.hidden_labels is not None
    header = [f"f{j}" for j in range(d.m)] + ["s"] + (["y"] if with_y else [])
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(d.n):
            row = [repr(float(v)) for v in d.features[i]]
            row.append(str(int(d.observed_labels[i])))
            if with_y:
                row.append(str(int(d.hidden_labels[i])))
            w.writerow(row)


def read_features_csv(path) -> np.ndarray:
    """Feature columns ``f0..f{m-1}`` of a CSV; trailing ``s``/``y`` columns are ignored."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DatasetParseError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetParseError(f"{path} is empty") from None
        n_feat = 0
        while n_feat < len(header) and header[n_feat] == f"f{n_feat}":
            n_feat += 1
        if n_feat == 0 or header[n_feat:] not in ([], ["s"], ["s", "y"]):
            raise DatasetParseError(f"bad header {header!r}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not t.strip() for t in rec):
                continue
            if len(rec) != len(header):
                raise DatasetParseError(f"row {lineno}: {len(rec)} fields, expected {len(header)}")
            try:
                rows.append([float(t) for t in rec[:n_feat]])
            except ValueError as exc:
                raise DatasetParseError(f"row {lineno}: {exc}") from None
    return np.array(rows, dtype=np.float64).reshape(len(rows), n_feat)
