"""Data loading, censoring simulation, the repeated-trial error protocol,
synthetic data and runtime benchmarks."""
from __future__ import annotations

import csv
import itertools
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from censcorr.correlation import (
    ASYM_TOBIT,
    METHODS,
    POSITIVE,
    SYM_TOBIT,
    CorrelationConfig,
    InsufficientDataError,
    PairedCensoredData,
    StageFailure,
    UndefinedCorrelationError,
    estimate,
    pcc,
)
from censcorr.tobit import ASYMMETRIC, SYMMETRIC, EMConfig

logger = logging.getLogger(__name__)

# roughly log-spaced sample sizes from 10 to 1000
BENCH_N_GRID = (10, 17, 31, 56, 100, 177, 316, 562, 1000)


class DataError(ValueError):
    pass


class MissingColumnError(DataError):
    pass


class CellParseError(DataError):
    def __init__(self, row: int, column: str, text: str):
        super().__init__(f"row {row}, column {column!r}: cannot parse {text!r} as a number")
        self.row = row
        self.column = column


# ------------------------------------------------------------------ datasets


@dataclass(frozen=True)
class Dataset:
    names: tuple
    values: np.ndarray
    provenance: str = ""
    dropped_rows: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        names = tuple(self.names)
        if values.ndim != 2 or values.shape[1] != len(names):
            raise DataError(f"values of shape {values.shape} do not match {len(names)} names")
        if len(set(names)) != len(names):
            raise DataError("variable names must be unique")
        if values.shape[1] < 3:
            raise DataError("need at least 3 variables: two targets and one side variable")
        if not np.all(np.isfinite(values)):
            raise DataError("dataset values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.index(name)]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise MissingColumnError(f"no column named {name!r}; available: {', '.join(self.names)}") from None

    def subset(self, rows) -> "Dataset":
        return Dataset(self.names, self.values[rows], self.provenance)


def _read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file, header row expected") from None
        rows = [row for row in reader if any(cell.strip() for cell in row)]
    return header, rows


def load_csv(path, target_names: Sequence[str] = ()) -> Dataset:
    """Read a numeric CSV with a header row.

    Rows containing a blank cell are dropped and counted in
    ``dropped_rows``. Any other non-numeric cell is an error.
    """
    header, rows = _read_rows(path)
    for name in target_names:
        if name not in header:
            raise MissingColumnError(f"{path}: no column named {name!r}")
    kept, dropped = [], 0
    for i, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i} has {len(row)} cells, header has {len(header)}")
        if any(not cell.strip() for cell in row):
            dropped += 1
            continue
        vals = []
        for name, cell in zip(header, row):
            try:
                v = float(cell)
            except ValueError:
                raise CellParseError(i, name, cell) from None
            if not math.isfinite(v):
                raise CellParseError(i, name, cell)
            vals.append(v)
        kept.append(vals)
    if dropped:
        logger.warning("%s: dropped %d row(s) with missing cells", path, dropped)
    values = np.array(kept, dtype=float).reshape(len(kept), len(header))
    return Dataset(tuple(header), values, provenance=str(path), dropped_rows=dropped)


@dataclass
class CensoredColumn:
    values: np.ndarray  # hidden entries hold their reported limit
    visible: np.ndarray
    theta: float


def read_censored_csv(path, targets: Sequence[str]):
    """Read a CSV whose target columns may hold ``<limit`` cells.

    A ``<limit`` cell marks a value below the detection limit. Each target
    gets one limit; when cells disagree the largest is used, and a column
    without such cells is fully visible. Every other column must be numeric.
    Rows with blank cells are dropped.

    Returns ``(side_names, side, columns)`` with ``side`` of shape
    ``(n, n_side)`` and ``columns`` mapping each target to a
    ``CensoredColumn``.
    """
    header, rows = _read_rows(path)
    for name in targets:
        if name not in header:
            raise MissingColumnError(f"{path}: no column named {name!r}")
    t_idx = [header.index(name) for name in targets]
    side_idx = [j for j in range(len(header)) if j not in t_idx]
    raw = {j: [] for j in t_idx}
    side, dropped = [], 0
    for i, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i} has {len(row)} cells, header has {len(header)}")
        if any(not cell.strip() for cell in row):
            dropped += 1
            continue
        for j in t_idx:
            cell = row[j].strip()
            hidden = cell.startswith("<")
            try:
                v = float(cell[1:] if hidden else cell)
            except ValueError:
                raise CellParseError(i, header[j], cell) from None
            if not math.isfinite(v):
                raise CellParseError(i, header[j], cell)
            raw[j].append((v, hidden))
        vals = []
        for j in side_idx:
            try:
                v = float(row[j])
            except ValueError:
                raise CellParseError(i, header[j], row[j]) from None
            if not math.isfinite(v):
                raise CellParseError(i, header[j], row[j])
            vals.append(v)
        side.append(vals)
    if dropped:
        logger.warning("%s: dropped %d row(s) with missing cells", path, dropped)
    columns = {}
    for name, j in zip(targets, t_idx):
        y = np.array([v for v, _ in raw[j]], dtype=float)
        visible = ~np.array([h for _, h in raw[j]], dtype=bool)
        if (~visible).any():
            theta = float(y[~visible].max())
            if (y[visible] < theta).any():
                raise DataError(f"column {name!r}: a detected value lies below the detection limit {theta}")
        else:
            theta = float(y.min()) if y.size else 0.0
        columns[name] = CensoredColumn(y, visible, theta)
    side_arr = np.array(side, dtype=float).reshape(len(side), len(side_idx))
    return tuple(header[j] for j in side_idx), side_arr, columns


def censor_column(col: CensoredColumn, negative_ratio: float) -> CensoredColumn:
    """Quantile censoring of a fully visible column; censored columns pass through."""
    if (~col.visible).any():
        return col
    if np.ptp(col.values) == 0:
        raise DataError("a constant column cannot be censored")
    theta = detection_limit(col.values, negative_ratio)
    return CensoredColumn(col.values, col.values >= theta, theta)


def load_censored_pair(
    path, var_a: str, var_b: str, negative_ratio: Optional[float] = None, sign_knowledge: Optional[Mapping[str, str]] = None
) -> PairedCensoredData:
    """Two targets from ``read_censored_csv``; fully visible targets are
    quantile-censored when ``negative_ratio`` is given."""
    if var_a == var_b:
        raise DataError("the two targets must differ")
    names, side, cols = read_censored_csv(path, (var_a, var_b))
    if not names:
        raise DataError("need at least one side variable")
    if negative_ratio is not None:
        cols = {k: censor_column(c, negative_ratio) for k, c in cols.items()}
    a, b = cols[var_a], cols[var_b]
    return PairedCensoredData(
        y_a=a.values,
        y_b=b.values,
        visible_a=a.visible,
        visible_b=b.visible,
        theta_a=a.theta,
        theta_b=b.theta,
        side_info=side.T,
        side_names=names,
        name_a=var_a,
        name_b=var_b,
        sign_knowledge=dict(sign_knowledge or {}),
    )


def load_signs(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        signs = json.load(fh)
    if not isinstance(signs, dict):
        raise DataError(f"{path}: expected a JSON object mapping variable names to labels")
    return {str(k): str(v) for k, v in signs.items()}


def all_positive_signs(names) -> dict:
    return {name: POSITIVE for name in names}


# ----------------------------------------------------------------- censoring


def detection_limit(values, negative_ratio: float) -> float:
    """Order statistic of rank ``floor(ratio * n)`` (zero-based).

    With distinct values exactly ``floor(ratio * n)`` entries lie strictly
    below the returned limit.
    """
    if not 0 < negative_ratio < 1:
        raise ValueError("negative_ratio must lie in (0, 1)")
    v = np.sort(np.asarray(values, dtype=float))
    k = min(int(math.floor(negative_ratio * v.shape[0] + 1e-9)), v.shape[0] - 1)
    return float(v[k])


def censor(
    ds: Dataset, var_a: str, var_b: str, negative_ratio: float, sign_knowledge: Optional[Mapping[str, str]] = None
) -> PairedCensoredData:
    """Hide target entries strictly below their empirical quantile."""
    if var_a == var_b:
        raise DataError("the two targets must differ")
    ia, ib = ds.index(var_a), ds.index(var_b)
    cols = {}
    for name, j in ((var_a, ia), (var_b, ib)):
        col = ds.values[:, j]
        if np.ptp(col) == 0:
            raise DataError(f"column {name!r} is constant and cannot be censored")
        theta = detection_limit(col, negative_ratio)
        cols[name] = (col, col >= theta, theta)
    side_idx = [j for j in range(ds.p) if j not in (ia, ib)]
    ya, va, ta = cols[var_a]
    yb, vb, tb = cols[var_b]
    return PairedCensoredData(
        y_a=ya,
        y_b=yb,
        visible_a=va,
        visible_b=vb,
        theta_a=ta,
        theta_b=tb,
        side_info=ds.values[:, side_idx].T,
        side_names=tuple(ds.names[j] for j in side_idx),
        name_a=var_a,
        name_b=var_b,
        sign_knowledge=dict(sign_knowledge or {}),
    )


# -------------------------------------------------------------------- trials


@dataclass
class TrialResult:
    pair: tuple
    seed: int
    reference: float
    errors: dict
    estimates: dict
    timing: dict
    failures: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pair"] = list(self.pair)
        return d


def _harness_config(config: Optional[CorrelationConfig]) -> CorrelationConfig:
    # signs come from the caller, never from the data
    return config or CorrelationConfig(infer_pair_sign=False)


def run_trial(
    ds: Dataset,
    var_a: str,
    var_b: str,
    n_sub: int = 50,
    negative_ratio: float = 0.8,
    seed: int = 0,
    sign_knowledge: Optional[Mapping[str, str]] = None,
    config: Optional[CorrelationConfig] = None,
    methods: Sequence[str] = METHODS,
) -> TrialResult:
    if not 2 <= n_sub <= ds.n:
        raise DataError(f"n_sub must lie in [2, {ds.n}], got {n_sub}")
    config = _harness_config(config)
    rows = np.random.default_rng(seed).choice(ds.n, size=n_sub, replace=False)
    sub = ds.subset(rows)
    ref = pcc(sub.column(var_a), sub.column(var_b))
    data = censor(sub, var_a, var_b, negative_ratio, sign_knowledge)
    errors, estimates, timing, failures = {}, {}, {}, {}
    for m in methods:
        t0 = time.perf_counter()
        try:
            r = estimate(data, m, config).r
        except (InsufficientDataError, UndefinedCorrelationError, StageFailure) as exc:
            r = None
            failures[m] = f"{type(exc).__name__}: {exc}"
        timing[m] = time.perf_counter() - t0
        estimates[m] = r
        errors[m] = None if r is None else abs(r - ref)
    return TrialResult((var_a, var_b), int(seed), ref, errors, estimates, timing, failures)


@dataclass
class ExperimentReport:
    pairs: list
    methods: tuple
    trials: int
    config: dict
    results: list  # TrialResult, ordered by pair then trial

    def errors(self, pair, method) -> np.ndarray:
        vals = [r.errors[method] for r in self.results if r.pair == tuple(pair)]
        return np.array([np.nan if v is None else v for v in vals], dtype=float)

    def summary(self, pair, method) -> tuple:
        """``(mean, std, n_valid)`` over trials where the estimate exists."""
        e = self.errors(pair, method)
        e = e[~np.isnan(e)]
        if e.size == 0:
            return float("nan"), float("nan"), 0
        return float(e.mean()), float(e.std()), int(e.size)

    def winner(self, pair) -> Optional[str]:
        best, best_val = None, math.inf
        for m in self.methods:
            mean = self.summary(pair, m)[0]
            if not math.isnan(mean) and mean < best_val:
                best, best_val = m, mean
        return best

    def winner_counts(self) -> dict:
        counts = {m: 0 for m in self.methods}
        for pair in self.pairs:
            w = self.winner(pair)
            if w is not None:
                counts[w] += 1
        return counts

    def to_dict(self) -> dict:
        rows = []
        for pair in self.pairs:
            row = {"pair": list(pair), "winner": self.winner(pair)}
            for m in self.methods:
                mean, std, k = self.summary(pair, m)
                row[m] = {"mean": None if math.isnan(mean) else mean, "std": None if math.isnan(std) else std, "n_valid": k}
            rows.append(row)
        return {
            "config": self.config,
            "trials": self.trials,
            "methods": list(self.methods),
            "pairs": rows,
            "winner_counts": self.winner_counts(),
            "results": [r.to_dict() for r in self.results],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def to_table(self) -> str:
        head = ["pair"] + list(self.methods)
        body = []
        for pair in self.pairs:
            cells = [f"{pair[0]}-{pair[1]}"]
            for m in self.methods:
                mean, std, _ = self.summary(pair, m)
                cells.append("n/a" if math.isnan(mean) else f"{mean:.3f} ({std:.3f})")
            body.append(cells)
        counts = self.winner_counts()
        body.append(["wins"] + [str(counts[m]) for m in self.methods])
        return _format_table(head, body)


def _format_table(head, body) -> str:
    widths = [max(len(str(r[j])) for r in [head] + body) for j in range(len(head))]
    lines = []
    for k, row in enumerate([head] + body):
        lines.append("  ".join(str(c).ljust(w) if j == 0 else str(c).rjust(w) for j, (c, w) in enumerate(zip(row, widths))))
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _trial_task(args):
    return run_trial(*args[:-2], **args[-2], methods=args[-1])


def run_experiment(
    ds: Dataset,
    pairs: Optional[Sequence[tuple]] = None,
    n_sub: int = 50,
    trials: int = 50,
    negative_ratio: float = 0.8,
    base_seed: int = 0,
    sign_knowledge: Optional[Mapping[str, str]] = None,
    config: Optional[CorrelationConfig] = None,
    methods: Sequence[str] = METHODS,
    jobs: int = 1,
) -> ExperimentReport:
    """Repeat ``run_trial`` for every pair with seeds ``base_seed + t``.

    ``pairs`` defaults to every ordered pair of variables. ``jobs > 1``
    spreads trials over worker processes; results do not depend on it.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if pairs is None:
        pairs = list(itertools.permutations(ds.names, 2))
    pairs = [tuple(p) for p in pairs]
    for a, b in pairs:
        ds.index(a), ds.index(b)
    config = _harness_config(config)
    methods = tuple(methods)
    kwargs = {"sign_knowledge": dict(sign_knowledge or {}), "config": config}
    tasks = [
        (ds, a, b, n_sub, negative_ratio, base_seed + t, kwargs, methods) for (a, b) in pairs for t in range(trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_trial_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_trial_task(t) for t in tasks]
    echo = {
        "n_sub": n_sub,
        "trials": trials,
        "negative_ratio": negative_ratio,
        "base_seed": base_seed,
        "lambda": config.lam,
        "em_max_iters": config.em.max_iters,
        "em_loglik_tol": config.em.loglik_tol,
        "infer_pair_sign": config.infer_pair_sign,
        "sign_knowledge": kwargs["sign_knowledge"],
        "dataset": ds.provenance,
    }
    return ExperimentReport(pairs, methods, trials, echo, results)


# ----------------------------------------------------------------- synthetic


def synth_generate(d: int, n: int, rho: float, seed: int = 0) -> Dataset:
    """Rows from a zero-mean multivariate normal with unit variances and
    constant off-diagonal correlation ``rho``."""
    if d < 3:
        raise ValueError("d must be >= 3")
    if n < 1:
        raise ValueError("n must be >= 1")
    if not abs(rho) < 1:
        raise ValueError("|rho| must be < 1")
    if rho < -1.0 / (d - 1):
        raise ValueError(f"rho={rho} < -1/(d-1) gives a covariance that is not positive semidefinite")
    rng = np.random.default_rng(seed)
    # factor form of the exchangeable covariance: common + idiosyncratic part
    if rho >= 0:
        common = rng.standard_normal((n, 1))
        values = math.sqrt(rho) * common + math.sqrt(1.0 - rho) * rng.standard_normal((n, d))
    else:
        C = np.full((d, d), rho) + (1.0 - rho) * np.eye(d)
        values = rng.multivariate_normal(np.zeros(d), C, size=n, method="eigh")
    names = tuple(f"v{i + 1}" for i in range(d))
    return Dataset(names, values, provenance=f"synthetic exchangeable d={d} n={n} rho={rho} seed={seed}")


# ----------------------------------------------------------------- benchmark


@dataclass
class BenchmarkRow:
    n: int
    times: dict  # prior kind -> list of seconds
    source: str = "dataset"

    def mean(self, kind) -> float:
        return float(np.mean(self.times[kind]))

    def std(self, kind) -> float:
        return float(np.std(self.times[kind]))

    def ratio(self, num=ASYMMETRIC, den=SYMMETRIC) -> float:
        return self.mean(num) / self.mean(den)


_KIND_KEY = {ASYMMETRIC: "asym", SYMMETRIC: "sym"}


def benchmark_runtime(
    ds: Dataset,
    n_values: Sequence[int] = BENCH_N_GRID,
    iters: int = 30,
    prior_kinds: Sequence[str] = (ASYMMETRIC, SYMMETRIC),
    repeats: int = 10,
    pair: Optional[tuple] = None,
    negative_ratio: float = 0.8,
    seed: int = 0,
    sign_knowledge: Optional[Mapping[str, str]] = None,
    lam: float = 1.0,
) -> list:
    """Wall-clock seconds of the two-stage Tobit estimator per sample size.

    Every fit runs exactly ``iters`` EM iterations. The prior kinds are
    interleaved inside each repeat so drift hits them equally. Sizes beyond
    the dataset use a synthetic exchangeable sample with the same number of
    variables.
    """
    pair = tuple(pair) if pair is not None else ds.names[:2]
    signs = all_positive_signs(ds.names) if sign_knowledge is None else dict(sign_knowledge)
    config = CorrelationConfig(lam=lam, em=EMConfig(max_iters=iters, loglik_tol=0.0), infer_pair_sign=False)
    method = {ASYMMETRIC: ASYM_TOBIT, SYMMETRIC: SYM_TOBIT}
    rows = []
    for k, n in enumerate(n_values):
        source, base = "dataset", ds
        if n > ds.n:
            source = "synthetic"
            base = synth_generate(ds.p, n, 0.5, seed + k)
            base = Dataset(ds.names, base.values, base.provenance)
        rng = np.random.default_rng(seed + k)
        sub = base.subset(rng.choice(base.n, size=n, replace=False))
        data = censor(sub, pair[0], pair[1], negative_ratio, signs)
        times = {kind: [] for kind in prior_kinds}
        for _ in range(repeats):
            for kind in prior_kinds:
                t0 = time.perf_counter()
                estimate(data, method[kind], config)
                times[kind].append(time.perf_counter() - t0)
        rows.append(BenchmarkRow(int(n), times, source))
    return rows


def benchmark_to_dict(rows) -> list:
    out = []
    for row in rows:
        rec = {"n": row.n, "source": row.source}
        for kind in row.times:
            key = _KIND_KEY.get(kind, kind)
            rec[key] = row.mean(kind)
            rec[f"{key}_std"] = row.std(kind)
        if ASYMMETRIC in row.times and SYMMETRIC in row.times:
            rec["ratio"] = row.ratio()
        out.append(rec)
    return out


def benchmark_table(rows) -> str:
    recs = benchmark_to_dict(rows)
    kinds = [k for k in ("asym", "sym") if recs and k in recs[0]]
    head = ["n"] + kinds + (["ratio"] if "ratio" in (recs[0] if recs else {}) else [])
    body = []
    for rec in recs:
        cells = [str(rec["n"])] + [f"{rec[k]:.3f} ({rec[k + '_std']:.3f})" for k in kinds]
        if "ratio" in rec:
            cells.append(f"{rec['ratio']:.3f}")
        body.append(cells)
    return _format_table(head, body)
