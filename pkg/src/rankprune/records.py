"""Experiment records and their CSV / JSON persistence.

Floats are rounded to 9 significant digits when a record is built, so
writing and re-reading a record gives back an identical object.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

CSV_COLUMNS = (
    "axis", "axis_value", "pi1", "rho1", "trial", "method",
    "f1", "error", "auc_pr", "rho1_hat", "rho0_hat", "pi1_hat", "pi0_hat", "seed",
)
EXTRA_COLUMNS = ("rho1_real", "rho0_real", "d", "dim", "n", "p_y1", "noise_frac", "status")
# wall_ms is kept out of the CSV so repeated runs stay byte-identical
JSON_ONLY = ("wall_ms",)

_METRIC_COLUMNS = ("f1", "error", "auc_pr", "rho1_hat", "rho0_hat", "pi1_hat", "pi0_hat")


def sig9(v: Optional[float]) -> Optional[float]:
    if v is None:
        return None
    v = float(v)
    return v if not math.isfinite(v) else float(f"{v:.9g}")


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


@dataclass(frozen=True)
class ExperimentRecord:
    axis: str
    axis_value: float
    pi1: float
    rho1: float
    trial: int
    method: str
    seed: int
    f1: Optional[float] = None
    error: Optional[float] = None
    auc_pr: Optional[float] = None
    rho1_hat: Optional[float] = None
    rho0_hat: Optional[float] = None
    pi1_hat: Optional[float] = None
    pi0_hat: Optional[float] = None
    rho1_real: Optional[float] = None
    rho0_real: Optional[float] = None
    d: Optional[float] = None
    dim: Optional[int] = None
    n: Optional[int] = None
    p_y1: Optional[float] = None
    noise_frac: Optional[float] = None
    status: str = "ok"
    wall_ms: Optional[float] = None

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if f.type in ("float", "Optional[float]"):
                object.__setattr__(self, f.name, sig9(v))
            elif f.type in ("int", "Optional[int]"):
                object.__setattr__(self, f.name, int(v))

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_row(self) -> list[str]:
        return [fmt(getattr(self, c)) for c in CSV_COLUMNS + EXTRA_COLUMNS]

    @classmethod
    def from_row(cls, row: dict) -> "ExperimentRecord":
        kwargs = {}
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        for name, raw in row.items():
            if name not in types:
                raise ValueError(f"unknown record column {name!r}")
            t = types[name]
            if raw == "" and t.startswith("Optional"):
                kwargs[name] = None
            elif "float" in t:
                kwargs[name] = float(raw)
            elif "int" in t:
                kwargs[name] = int(raw)
            else:
                kwargs[name] = raw
        return cls(**kwargs)


def write_records_csv(records: Iterable[ExperimentRecord], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS + EXTRA_COLUMNS)
        for r in records:
            w.writerow(r.to_row())


def read_records_csv(path) -> list[ExperimentRecord]:
    with Path(path).open(newline="") as fh:
        return [ExperimentRecord.from_row(row) for row in csv.DictReader(fh)]


def write_records_json(records: Iterable[ExperimentRecord], path) -> None:
    payload = [r.to_dict() for r in records]
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def read_records_json(path) -> list[ExperimentRecord]:
    return [ExperimentRecord(**obj) for obj in json.loads(Path(path).read_text())]


def _mean_se(values: list[float]) -> tuple[Optional[float], Optional[float]]:
    if not values:
        return None, None
    k = len(values)
    mean = math.fsum(values) / k
    if k < 2:
        return mean, None
    var = math.fsum((v - mean) ** 2 for v in values) / (k - 1)
    return mean, math.sqrt(var / k)


def aggregate(records: Iterable[ExperimentRecord]) -> list[dict]:
    """Mean and standard error per (axis, axis_value, pi1, rho1, method) cell."""
    groups: dict[tuple, list[ExperimentRecord]] = {}
    for r in records:
        groups.setdefault((r.axis, r.axis_value, r.pi1, r.rho1, r.method), []).append(r)
    rows = []
    for (axis, value, pi1, rho1, method), recs in groups.items():
        good = [r for r in recs if r.ok]
        row = {
            "axis": axis,
            "axis_value": value,
            "pi1": pi1,
            "rho1": rho1,
            "method": method,
            "trials": len(recs),
            "failed": len(recs) - len(good),
        }
        for col in _METRIC_COLUMNS:
            vals = [getattr(r, col) for r in good if getattr(r, col) is not None]
            mean, se = _mean_se(vals)
            row[f"{col}_mean"] = sig9(mean)
            row[f"{col}_se"] = sig9(se)
        rows.append(row)
    return rows


AGGREGATE_COLUMNS = (
    "axis", "axis_value", "pi1", "rho1", "method", "trials", "failed",
    *[f"{c}_{s}" for c in _METRIC_COLUMNS for s in ("mean", "se")],
)


def write_aggregate_csv(rows: list[dict], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_COLUMNS)
        for row in rows:
            w.writerow([fmt(row[c]) for c in AGGREGATE_COLUMNS])
