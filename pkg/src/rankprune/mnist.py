"""MNIST IDX ingestion and the one-vs-rest noise-estimation grid."""

from __future__ import annotations

import gzip
import itertools
import struct
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .classifier import FitConfig
from .crossval import DEFAULT_FOLDS
from .data import Dataset, complete_rates, rates_from_pi1_rho1
from .errors import BadMagic, RankPruneError, TruncatedFile
from .noise import theoretical_rates, theory_inputs_from_sample
from .pruning import estimate_from_data
from .synthetic import corrupt

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


def _read_bytes(path) -> bytes:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as fh:
        return fh.read()


def _header(buf: bytes, magic: int, ndim: int, path) -> tuple[int, ...]:
    need = 4 * (1 + ndim)
    if len(buf) >= 4:
        (got,) = struct.unpack(">I", buf[:4])
        if got != magic:
            raise BadMagic(f"{path}: magic 0x{got:08x}, expected 0x{magic:08x}")
    if len(buf) < need:
        raise TruncatedFile(f"{path}: {len(buf)} bytes, header needs {need}")
    return struct.unpack(f">{ndim}I", buf[4:need])


def read_idx_images(path) -> np.ndarray:
    """``(count, rows*cols)`` uint8 pixel matrix."""
    buf = _read_bytes(path)
    count, rows, cols = _header(buf, IMAGES_MAGIC, 3, path)
    size = count * rows * cols
    body = buf[16:]
    if len(body) < size:
        raise TruncatedFile(f"{path}: {len(body)} pixel bytes, header promises {size}")
    return np.frombuffer(body, dtype=np.uint8, count=size).reshape(count, rows * cols)


def read_idx_labels(path) -> np.ndarray:
    buf = _read_bytes(path)
    (count,) = _header(buf, LABELS_MAGIC, 1, path)
    body = buf[8:]
    if len(body) < count:
        raise TruncatedFile(f"{path}: {len(body)} label bytes, header promises {count}")
    return np.frombuffer(body, dtype=np.uint8, count=count).astype(np.int64)


def load_mnist_idx(images_path, labels_path, digit: int) -> Dataset:
    """One-vs-rest dataset for ``digit`` with pixels scaled to [0, 1].

    Observed and hidden labels are both the clean binary labels; corrupt
    the observed ones separately.
    """
    X = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if X.shape[0] != labels.shape[0]:
        raise TruncatedFile(f"{X.shape[0]} images but {labels.shape[0]} labels")
    y = (labels == digit).astype(np.int64)
    return Dataset(X.astype(np.float64) / 255.0, y, y)


def mnist_grid(
    d: Dataset,
    values: Iterable[float] = (0.0, 0.25, 0.5),
    seed: int = 0,
    cfg: Optional[FitConfig] = None,
    cv_k: int = DEFAULT_FOLDS,
) -> list[dict]:
    """Estimate the noise rates at every feasible ``(pi1, rho1)`` grid point.

    Each row carries the realized rates, the confident-counts estimates and
    the closed-form prediction computed from the same ``g``.
    """
    cfg = cfg or FitConfig(seed=seed)
    y = d.hidden_labels
    p_y1 = float(y.mean())
    rows = []
    for k, (pi1, rho1) in enumerate(itertools.product(values, repeat=2)):
        try:
            nominal = rates_from_pi1_rho1(pi1, rho1, p_y1)
        except RankPruneError:
            continue
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
        cor = corrupt(y, nominal.rho1, nominal.rho0, rng)
        noisy = d.with_observed(cor.s)
        row = {"pi1": pi1, "rho1": rho1, "rho1_real": cor.realized_rho1, "rho0_real": cor.realized_rho0}
        try:
            est = estimate_from_data(noisy, cfg, cv_k, seed)
            rates = complete_rates(est.rho1_conf, est.rho0_conf, est.p_s1)
            ti = theory_inputs_from_sample(
                est.g, cor.s, y, cor.realized_rho1, cor.realized_rho0
            )
            r1t, r0t, _, _ = theoretical_rates(ti)
            real = complete_rates(cor.realized_rho1, cor.realized_rho0, est.p_s1)
            row.update(
                rho1_hat=est.rho1_conf,
                rho0_hat=est.rho0_conf,
                pi1_hat=rates.pi1,
                pi0_hat=rates.pi0,
                rho1_thry=r1t,
                rho0_thry=r0t,
                pi1_real=real.pi1,
                status="ok",
            )
        except RankPruneError as exc:
            row["status"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows
