"""Command-line front end: ``censcorr {fit,impute,correlate,simulate,bench}``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from censcorr import correlation as corr
from censcorr import harness
from censcorr.nnls import NnlsError
from censcorr.tobit import ASYMMETRIC, SYMMETRIC, EMConfig, EMFailure, TobitError, fit_tobit

log = logging.getLogger("censcorr")

PRIORS = {"sym": SYMMETRIC, "asym": ASYMMETRIC}
METHOD_ALIASES = {"naive": corr.NAIVE, "sym": corr.SYM_TOBIT, "asym": corr.ASYM_TOBIT}

# library failures mapped to exit status 1
COMPUTE_ERRORS = (
    harness.DataError,
    TobitError,
    EMFailure,
    NnlsError,
    corr.StageFailure,
    corr.InsufficientDataError,
    corr.UndefinedCorrelationError,
    ValueError,
    OSError,
)


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    command: str
    input: Optional[str]
    targets: tuple
    prior: str
    lam: float
    ratio: Optional[float]
    n_sub: int
    trials: int
    seed: int
    signs: Optional[str]
    output: Optional[str]
    format: str
    jobs: int
    iters: int

    def __post_init__(self):
        if self.ratio is not None and not 0 < self.ratio < 1:
            raise UsageError("--ratio must lie in (0, 1)")
        if self.trials < 1:
            raise UsageError("--trials must be >= 1")
        if self.n_sub < 2:
            raise UsageError("--n-sub must be >= 2")
        if not self.lam > 0:
            raise UsageError("--lambda must be > 0")
        if self.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        if self.iters < 1:
            raise UsageError("--iters must be >= 1")


def _targets(text):
    names = tuple(t.strip() for t in text.split(",") if t.strip())
    if not names:
        raise argparse.ArgumentTypeError("expected one or more comma-separated column names")
    return names


def _common(p: argparse.ArgumentParser, input_required=True, default_ratio=None):
    p.add_argument("--input", required=input_required, help="CSV file with a header row")
    p.add_argument("--targets", type=_targets, default=(), help="comma-separated target column names")
    p.add_argument("--prior", choices=sorted(PRIORS), default="asym")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="base prior penalty on standardized features")
    p.add_argument("--ratio", type=float, default=default_ratio, help="negative ratio used to censor targets")
    p.add_argument("--n-sub", type=int, default=50)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=None, help="defaults to $CENSCORR_SEED, then 0")
    p.add_argument("--signs", help="JSON sidecar mapping variable names to positive/negative/unknown")
    p.add_argument("--output", help="write the result here instead of stdout")
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--iters", type=int, default=30, help="EM iterations per fit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="censcorr", description="Correlation of left-censored series via Tobit models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a Tobit model for one target on all other columns")
    _common(p)
    p = sub.add_parser("impute", help="fill censored entries of one target with conditional means")
    _common(p)
    p = sub.add_parser("correlate", help="naive and Tobit-based correlation of two targets")
    _common(p)
    p.add_argument("--methods", type=_targets, default=("naive", "sym", "asym"))
    p = sub.add_parser("simulate", help="repeated censoring trials over variable pairs")
    _common(p, input_required=False, default_ratio=0.8)
    p.add_argument("--synth-d", type=int, default=8, help="variables of the synthetic dataset used without --input")
    p.add_argument("--synth-n", type=int, default=2000)
    p.add_argument("--rho", type=float, default=0.5)
    p = sub.add_parser("bench", help="runtime of the asymmetric and symmetric estimators")
    _common(p, input_required=False, default_ratio=0.8)
    p.add_argument("--n-values", type=lambda s: [int(v) for v in s.split(",")], default=list(harness.BENCH_N_GRID))
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--synth-d", type=int, default=8)
    p.add_argument("--synth-n", type=int, default=1000)
    p.add_argument("--rho", type=float, default=0.5)
    return parser


def _resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get("CENSCORR_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"CENSCORR_SEED must be an integer, got {env!r}") from None


def _config(args) -> CliConfig:
    return CliConfig(
        command=args.command,
        input=args.input,
        targets=tuple(args.targets),
        prior=args.prior,
        lam=args.lam,
        ratio=args.ratio,
        n_sub=args.n_sub,
        trials=args.trials,
        seed=_resolve_seed(args.seed),
        signs=args.signs,
        output=args.output,
        format=args.format,
        jobs=args.jobs,
        iters=args.iters,
    )


def _signs(cfg: CliConfig) -> dict:
    return harness.load_signs(cfg.signs) if cfg.signs else {}


def _em(cfg: CliConfig) -> EMConfig:
    return EMConfig(max_iters=cfg.iters, seed=cfg.seed)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


# ------------------------------------------------------------------ commands


def _fit_target(cfg: CliConfig):
    if len(cfg.targets) != 1:
        raise UsageError("--targets must name exactly one column for this command")
    target = cfg.targets[0]
    names, side, cols = harness.read_censored_csv(cfg.input, (target,))
    if not names:
        raise harness.DataError("need at least one feature column besides the target")
    col = cols[target]
    if cfg.ratio is not None:
        col = harness.censor_column(col, cfg.ratio)
    signs = _signs(cfg)
    t_label = signs.get(target, corr.UNKNOWN)
    labels = [corr.relative_sign(signs.get(n, corr.UNKNOWN), t_label) for n in names]
    X = side.T
    positive, negative = [], []
    if PRIORS[cfg.prior] == ASYMMETRIC:
        positive = [h for h, lab in enumerate(labels) if lab == corr.POSITIVE]
        negative = [h for h, lab in enumerate(labels) if lab == corr.NEGATIVE]
    fitted = fit_tobit(
        X, col.values, col.visible, col.theta, kind=PRIORS[cfg.prior], lam=cfg.lam,
        positive=positive, negative=negative, config=_em(cfg),
    )
    return target, names, X, col, fitted


def cmd_fit(cfg: CliConfig) -> str:
    target, names, _, col, fitted = _fit_target(cfg)
    doc = {"target": target, "features": list(names), "n": int(col.values.shape[0]),
           "n_censored": int((~col.visible).sum()), "seed": cfg.seed}
    doc.update(fitted.to_dict())
    if cfg.format == "json":
        return _dump(doc)
    head = ["feature", "coef"]
    body = [[n, f"{c:.6g}"] for n, c in zip(names, fitted.coef)]
    body.append(["(intercept)", f"{fitted.intercept:.6g}"])
    body.append(["(sigma)", f"{fitted.sigma:.6g}"])
    return harness._format_table(head, body)


def cmd_impute(cfg: CliConfig) -> str:
    target, _, X, col, fitted = _fit_target(cfg)
    values = fitted.impute(X, np.where(col.visible, col.values, np.nan), col.visible)
    if cfg.format == "json":
        return _dump({"target": target, "theta": col.theta, "visible": col.visible.tolist(), "values": values.tolist()})
    body = [[str(i), "yes" if v else "no", f"{y:.6g}"] for i, (v, y) in enumerate(zip(col.visible, values))]
    return harness._format_table(["row", "visible", target], body)


def cmd_correlate(cfg: CliConfig, methods=("naive", "sym", "asym")) -> str:
    if len(cfg.targets) != 2:
        raise UsageError("--targets must name exactly two columns, e.g. --targets A,B")
    unknown = [m for m in methods if m not in METHOD_ALIASES]
    if unknown:
        raise UsageError(f"unknown method(s) {unknown}; choose from {sorted(METHOD_ALIASES)}")
    data = harness.load_censored_pair(cfg.input, cfg.targets[0], cfg.targets[1], cfg.ratio, _signs(cfg))
    config = corr.CorrelationConfig(lam=cfg.lam, em=_em(cfg))
    out = []
    for m in methods:
        try:
            rec = corr.estimate(data, METHOD_ALIASES[m], config).to_dict()
            rec["available"] = True
        except (corr.InsufficientDataError, corr.UndefinedCorrelationError) as exc:
            # partial results are valid output
            rec = {"method": METHOD_ALIASES[m], "r": None, "n_effective": 0, "available": False, "diagnostics": {"error": str(exc)}}
        out.append(rec)
    if cfg.format == "json":
        return _dump(out)
    body = [[r["method"], "n/a" if r["r"] is None else f"{r['r']:.3f}", str(r["n_effective"])] for r in out]
    return harness._format_table(["method", "r", "n_effective"], body)


def _dataset(cfg: CliConfig, args) -> harness.Dataset:
    if cfg.input:
        return harness.load_csv(cfg.input, cfg.targets)
    return harness.synth_generate(args.synth_d, args.synth_n, args.rho, cfg.seed)


def cmd_simulate(cfg: CliConfig, args) -> str:
    ds = _dataset(cfg, args)
    if cfg.targets and len(cfg.targets) != 2:
        raise UsageError("--targets must name exactly two columns for simulate")
    pairs = [cfg.targets] if cfg.targets else None
    signs = _signs(cfg) if cfg.signs else (harness.all_positive_signs(ds.names) if not cfg.input else {})
    config = corr.CorrelationConfig(lam=cfg.lam, em=_em(cfg), infer_pair_sign=False)
    report = harness.run_experiment(
        ds, pairs, n_sub=cfg.n_sub, trials=cfg.trials, negative_ratio=cfg.ratio,
        base_seed=cfg.seed, sign_knowledge=signs, config=config, jobs=cfg.jobs,
    )
    if cfg.format == "json":
        return _dump(report.to_dict())
    echo = f"# n_sub={cfg.n_sub} trials={cfg.trials} ratio={cfg.ratio} seed={cfg.seed} lambda={cfg.lam}"
    return echo + "\n" + report.to_table()


def cmd_bench(cfg: CliConfig, args) -> str:
    ds = _dataset(cfg, args)
    pair = cfg.targets if cfg.targets else None
    if pair is not None and len(pair) != 2:
        raise UsageError("--targets must name exactly two columns for bench")
    signs = _signs(cfg) if cfg.signs else None
    rows = harness.benchmark_runtime(
        ds, args.n_values, iters=cfg.iters, repeats=args.repeats, pair=pair,
        negative_ratio=cfg.ratio, seed=cfg.seed, sign_knowledge=signs, lam=cfg.lam,
    )
    if cfg.format == "json":
        return _dump({"iters": cfg.iters, "repeats": args.repeats, "rows": harness.benchmark_to_dict(rows)})
    return harness.benchmark_table(rows)


def _emit(text: str, cfg: CliConfig):
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
    except UsageError as exc:
        parser.error(str(exc))
    try:
        if cfg.command == "fit":
            text = cmd_fit(cfg)
        elif cfg.command == "impute":
            text = cmd_impute(cfg)
        elif cfg.command == "correlate":
            text = cmd_correlate(cfg, args.methods)
        elif cfg.command == "simulate":
            text = cmd_simulate(cfg, args)
        else:
            text = cmd_bench(cfg, args)
    except UsageError as exc:
        parser.error(str(exc))
    except COMPUTE_ERRORS as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "command": cfg.command}
        sys.stderr.write(json.dumps(err) + "\n")
        return 1
    _emit(text, cfg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
