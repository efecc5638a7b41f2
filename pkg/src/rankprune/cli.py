"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 degenerate estimation, 4 infeasible
configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .classifier import FitConfig, LogisticModel, predict_proba
from .data import complete_rates, read_dataset_csv, read_features_csv
from .errors import (
    BadMagic,
    ConfigError,
    DatasetParseError,
    DegenerateCounts,
    DimensionMismatch,
    EmptyClass,
    InfeasibleConfig,
    InvalidRates,
    OverPrune,
    SingleClassInput,
    TooFewExamples,
    TruncatedFile,
)
from .mnist import load_mnist_idx, mnist_grid
from .pruning import estimate_from_data, rank_prune_fit
from .records import aggregate, fmt, write_aggregate_csv, write_records_csv, write_records_json
from .synthetic import AXES, METHODS, DEFAULT_PAIRS, SynthConfig, run_sweep

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_INFEASIBLE = 4

_INPUT_ERRORS = (
    DatasetParseError,
    ConfigError,
    BadMagic,
    TruncatedFile,
    EmptyClass,
    SingleClassInput,
    TooFewExamples,
    DimensionMismatch,
    FileNotFoundError,
)
_DEGENERATE_ERRORS = (DegenerateCounts, InvalidRates, OverPrune)

_SYNTH_KEYS = {"d": float, "dim": int, "n": int, "p_y1": float, "noise_frac": float,
               "pi1": float, "rho1": float, "trials": int, "seed": int}
_FIT_KEYS = {"max_iters": int, "tolerance": float, "learning_rate": str, "reg_inverse_c": float}
_SWEEP_KEYS = {"axis": str, "values": str, "pairs": str, "methods": str, "cv_k": int, "workers": int}

DEFAULT_BENCH = {
    "axis": "d",
    "values": "1, 2, 3, 4, 5, 6, 7",
    "pairs": ", ".join(f"{p}:{r}" for p, r in DEFAULT_PAIRS),
    "methods": ", ".join(METHODS),
    "trials": "200",
}


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment; unknown keys are errors."""
    known = {**_SYNTH_KEYS, **_FIT_KEYS, **_SWEEP_KEYS}
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _typed(key: str, value: str, kind):
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as {kind.__name__}") from None


def _floats(key: str, text: str) -> list[float]:
    return [_typed(key, t.strip(), float) for t in text.split(",") if t.strip()]


def _pairs(text: str) -> list[tuple[float, float]]:
    pairs = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        if ":" not in tok:
            raise ConfigError(f"pairs: expected pi1:rho1, got {tok!r}")
        a, b = tok.split(":", 1)
        pairs.append((_typed("pairs", a, float), _typed("pairs", b, float)))
    return pairs


def build_bench(raw: dict[str, str]) -> dict:
    """Turn parsed config text into keyword arguments for ``run_sweep``."""
    merged = {**DEFAULT_BENCH, **raw}
    synth = {k: _typed(k, v, _SYNTH_KEYS[k]) for k, v in merged.items() if k in _SYNTH_KEYS}
    fit_kw = {}
    for k, v in merged.items():
        if k in _FIT_KEYS:
            if k == "learning_rate" and v != "auto":
                fit_kw[k] = _typed(k, v, float)
            else:
                fit_kw[k] = _typed(k, v, _FIT_KEYS[k])
    axis = merged["axis"]
    if axis not in AXES:
        raise ConfigError(f"axis must be one of {AXES}, got {axis!r}")
    if "pairs" in raw or not ({"pi1", "rho1"} & raw.keys()):
        pairs = _pairs(merged["pairs"])
    else:
        pairs = [(synth.get("pi1", 0.0), synth.get("rho1", 0.0))]
    try:
        fit_cfg = FitConfig(**fit_kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return {
        "axis": axis,
        "values": _floats("values", merged["values"]),
        "pairs": pairs,
        "cfg": SynthConfig(**{k: v for k, v in synth.items() if k not in ("pi1", "rho1")}),
        "methods": [m.strip() for m in merged["methods"].split(",") if m.strip()],
        "fit_cfg": fit_cfg,
        "cv_k": _typed("cv_k", merged.get("cv_k", "3"), int),
        "workers": _typed("workers", merged.get("workers", "1"), int),
    }


def _fit_cfg(args) -> FitConfig:
    return FitConfig(
        max_iters=args.max_iters,
        tolerance=args.tol,
        reg_inverse_c=args.C,
        seed=args.seed,
    )


def _emit(payload: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(payload, indent=2))
    else:
        for k, v in payload.items():
            print(f"{k:>10s}  {fmt(v)}")


def cmd_estimate(args) -> int:
    d = read_dataset_csv(args.input)
    est = estimate_from_data(d, _fit_cfg(args), args.cv_k, args.seed, not args.no_stratify)
    rates = complete_rates(est.rho1_conf, est.rho0_conf, est.p_s1)
    payload = {
        "rho1": est.rho1_conf,
        "rho0": est.rho0_conf,
        "pi1": rates.pi1,
        "pi0": rates.pi0,
        "LB": est.thresholds.lb_y1,
        "UB": est.thresholds.ub_y0,
        "p_s1": est.p_s1,
        "p_y1": rates.p_y1,
        "clamped": rates.clamped,
    }
    _emit(payload, args.json)
    return EXIT_OK


def cmd_train(args) -> int:
    d = read_dataset_csv(args.input)
    override = None
    if (args.rho1 is None) != (args.rho0 is None):
        raise ConfigError("--rho1 and --rho0 must be given together")
    if args.rho1 is not None:
        n_pos = int(d.observed_labels.sum())
        if n_pos in (0, d.n):
            raise EmptyClass("both observed classes must be present")
        override = complete_rates(args.rho1, args.rho0, n_pos / d.n)
    res = rank_prune_fit(
        d, _fit_cfg(args), args.cv_k, args.seed, override, not args.no_stratify
    )
    res.model.save(args.model_out)
    payload = {
        "model_out": str(args.model_out),
        "mode": "given-rates" if override is not None else "estimated-rates",
        **{k: v for k, v in res.rates.as_dict().items()},
        "kept": int(res.prune.kept_indices.size),
        "removed_pos": res.prune.removed_pos,
        "removed_neg": res.prune.removed_neg,
        "converged": res.model.converged,
    }
    _emit(payload, args.json)
    return EXIT_OK


def cmd_predict(args) -> int:
    try:
        model = LogisticModel.load(args.model)
    except (OSError, ValueError, KeyError) as exc:
        raise DatasetParseError(f"cannot load model {args.model}: {exc}") from None
    X = read_features_csv(args.input)
    g = predict_proba(model, X).g
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["g", "pred"])
        for v in g:
            w.writerow([repr(float(v)), int(v >= 0.5)])
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def cmd_bench(args) -> int:
    raw = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        raw = parse_config_text(text)
    if args.trials is not None:
        raw["trials"] = str(args.trials)
    if args.seed is not None:
        raw["seed"] = str(args.seed)
    if args.workers is not None:
        raw["workers"] = str(args.workers)
    kw = build_bench(raw)
    records = run_sweep(**kw)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_records_csv(records, out / "trials.csv")
    write_aggregate_csv(aggregate(records), out / "aggregate.csv")
    write_records_json(records, out / "records.json")
    failed = sum(not r.ok for r in records)
    print(f"{len(records)} records ({failed} failed) -> {out}")
    return EXIT_OK


def cmd_mnist_grid(args) -> int:
    d = load_mnist_idx(args.images, args.labels, args.digit)
    if args.limit is not None and args.limit < d.n:
        d = d.subset(slice(0, args.limit))
    values = [float(v) for v in args.grid.split(",")]
    rows = mnist_grid(d, values, args.seed, _fit_cfg(args), args.cv_k)
    cols = ["pi1", "rho1", "rho1_real", "rho0_real", "rho1_hat", "rho0_hat", "pi1_hat",
            "pi0_hat", "rho1_thry", "rho0_thry", "pi1_real", "status"]
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([fmt(r.get(c)) for c in cols])
    finally:
        if args.out:
            out.close()
    ok = [r for r in rows if r["status"] == "ok"]
    if ok:
        md = sum(abs(r["rho1_hat"] - r["rho1_real"]) for r in ok) / len(ok)
        print(f"mean |rho1_hat - rho1| = {md:.4f} over {len(ok)} settings", file=sys.stderr)
    return EXIT_OK


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cv-k", type=int, default=3, help="cross-validation folds (default 3)")
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--C", type=float, default=1.0, help="inverse L2 strength (default 1)")
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-6)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankprune", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate noise rates of a labeled CSV")
    p.add_argument("input")
    p.add_argument("--json", action="store_true")
    _add_fit_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("train", help="rank-prune and fit a logistic model")
    p.add_argument("input")
    p.add_argument("--model-out", required=True)
    p.add_argument("--rho1", type=float, help="known rho1 (requires --rho0)")
    p.add_argument("--rho0", type=float, help="known rho0 (requires --rho1)")
    p.add_argument("--json", action="store_true")
    _add_fit_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score a CSV with a saved model")
    p.add_argument("input")
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("bench", help="run a synthetic sweep")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("mnist-grid", help="noise-estimation grid on MNIST one-vs-rest")
    p.add_argument("--images", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--digit", type=int, default=1)
    p.add_argument("--grid", default="0,0.25,0.5")
    p.add_argument("--limit", type=int)
    p.add_argument("--out")
    _add_fit_flags(p)
    p.set_defaults(func=cmd_mnist_grid)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"rankprune: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _DEGENERATE_ERRORS as exc:
        print(f"rankprune: degenerate estimate: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except InfeasibleConfig as exc:
        print(f"rankprune: infeasible configuration: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
