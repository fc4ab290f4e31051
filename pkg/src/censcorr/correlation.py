"""Pearson correlation between two left-censored series.

Three estimators are provided: the naive coefficient over rows visible in
both series, and two plug-in estimators that first impute censored values
with a Tobit fit (symmetric or asymmetric prior) and then correlate the
completed series.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from censcorr.tobit import ASYMMETRIC, SYMMETRIC, EMConfig, EMFailure, TobitError, fit_tobit

POSITIVE = "positive"
NEGATIVE = "negative"
UNKNOWN = "unknown"
LABELS = (POSITIVE, NEGATIVE, UNKNOWN)

NAIVE = "naive"
SYM_TOBIT = "sym_tobit"
ASYM_TOBIT = "asym_tobit"
METHODS = (NAIVE, SYM_TOBIT, ASYM_TOBIT)


class UndefinedCorrelationError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


class StageFailure(RuntimeError):
    """A Tobit stage failed; ``stage`` is ``"stage1"`` (B) or ``"stage2"`` (A)."""

    def __init__(self, message, stage, cause=None):
        super().__init__(message)
        self.stage = stage
        self.cause = cause


def pcc(ya, yb) -> float:
    """Pearson correlation of two equally long vectors."""
    ya = np.asarray(ya, dtype=float).reshape(-1)
    yb = np.asarray(yb, dtype=float).reshape(-1)
    if ya.shape != yb.shape:
        raise ValueError(f"length mismatch: {ya.shape[0]} vs {yb.shape[0]}")
    if ya.shape[0] < 2:
        raise InsufficientDataError("need at least two pairs")
    da = ya - ya.mean()
    db = yb - yb.mean()
    saa = float(da @ da)
    sbb = float(db @ db)
    # exact zero: any spread at all yields a defined coefficient
    if saa == 0.0 or sbb == 0.0:
        raise UndefinedCorrelationError("correlation is undefined for a constant series")
    r = float(da @ db) / np.sqrt(saa * sbb)
    return float(np.clip(r, -1.0, 1.0))


def relative_sign(feature_label: str, target_label: str) -> str:
    """Sign of a feature's correlation with a target from their orientation labels.

    Each variable carries one label describing the direction in which it
    moves with the quantity of interest. Two known labels agree
    (positive relation) or disagree (negative relation); anything unknown
    stays unknown.
    """
    for lab in (feature_label, target_label):
        if lab not in LABELS:
            raise ValueError(f"unknown sign label {lab!r}")
    if UNKNOWN in (feature_label, target_label):
        return UNKNOWN
    return POSITIVE if feature_label == target_label else NEGATIVE


def preprocess_signs(X, labels: Sequence[str]):
    """Negate rows labeled negative; return ``(X', I_pos)``.

    ``I_pos`` lists every row with a known sign, all of which are positive
    after the flip. Unknown rows are left alone.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    labels = list(labels)
    if len(labels) != X.shape[0]:
        raise ValueError(f"{len(labels)} labels for {X.shape[0]} rows")
    out = X.copy()
    i_pos = []
    for h, lab in enumerate(labels):
        if lab not in LABELS:
            raise ValueError(f"unknown sign label {lab!r}")
        if lab == NEGATIVE:
            out[h] = -out[h]
        if lab != UNKNOWN:
            i_pos.append(h)
    return out, i_pos


@dataclass(frozen=True)
class PairedCensoredData:
    """Two censored targets plus fully observed side variables.

    Hidden target entries are stored as NaN. ``sign_knowledge`` maps variable
    names (side variables and both targets) to orientation labels; missing
    names count as unknown.
    """

    y_a: np.ndarray
    y_b: np.ndarray
    visible_a: np.ndarray
    visible_b: np.ndarray
    theta_a: float
    theta_b: float
    side_info: np.ndarray
    side_names: tuple = ()
    name_a: str = "A"
    name_b: str = "B"
    sign_knowledge: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        va = np.asarray(self.visible_a, dtype=bool).reshape(-1)
        vb = np.asarray(self.visible_b, dtype=bool).reshape(-1)
        ya = np.where(va, np.asarray(self.y_a, dtype=float).reshape(-1), np.nan)
        yb = np.where(vb, np.asarray(self.y_b, dtype=float).reshape(-1), np.nan)
        S = np.asarray(self.side_info, dtype=float)
        if S.ndim == 1:
            S = S[None, :]
        n = ya.shape[0]
        if not (yb.shape[0] == n and va.shape[0] == n and vb.shape[0] == n and S.shape[1] == n):
            raise ValueError("targets, flags and side_info disagree on the number of rows")
        if not np.all(np.isfinite(S)):
            raise ValueError("side_info must be fully observed and finite")
        if not (np.isfinite(self.theta_a) and np.isfinite(self.theta_b)):
            raise ValueError("detection limits must be finite")
        if np.any(ya[va] < self.theta_a) or np.any(yb[vb] < self.theta_b):
            raise ValueError("visible values must not lie below their detection limit")
        if not (np.all(np.isfinite(ya[va])) and np.all(np.isfinite(yb[vb]))):
            raise ValueError("visible values must be finite")
        names = tuple(self.side_names) or tuple(f"x{h}" for h in range(S.shape[0]))
        if len(names) != S.shape[0]:
            raise ValueError("side_names must name every side_info row")
        for lab in self.sign_knowledge.values():
            if lab not in LABELS:
                raise ValueError(f"unknown sign label {lab!r}")
        object.__setattr__(self, "y_a", ya)
        object.__setattr__(self, "y_b", yb)
        object.__setattr__(self, "visible_a", va)
        object.__setattr__(self, "visible_b", vb)
        object.__setattr__(self, "side_info", S)
        object.__setattr__(self, "side_names", names)
        object.__setattr__(self, "sign_knowledge", dict(self.sign_knowledge))

    @property
    def n(self) -> int:
        return self.y_a.shape[0]

    @property
    def both_visible(self) -> np.ndarray:
        return self.visible_a & self.visible_b

    def label(self, name: str) -> str:
        return self.sign_knowledge.get(name, UNKNOWN)

    def side_labels(self, target: str) -> list:
        """Relative sign of each side variable with respect to ``target``."""
        t = self.label(target)
        return [relative_sign(self.label(s), t) for s in self.side_names]


@dataclass
class CorrelationEstimate:
    method: str
    r: float
    n_effective: int
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"method": self.method, "r": self.r, "n_effective": self.n_effective, "diagnostics": self.diagnostics}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


@dataclass
class CorrelationConfig:
    """Settings shared by the Tobit estimators.

    ``infer_pair_sign`` lets stage 2 take B's sign as a predictor of A from
    the visible-pair correlation when the labels do not fix it.
    """

    lam: float = 1.0
    em: EMConfig = field(default_factory=EMConfig)
    infer_pair_sign: bool = True

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be > 0")


def naive_pcc(data: PairedCensoredData) -> CorrelationEstimate:
    rows = data.both_visible
    k = int(rows.sum())
    if k < 2:
        raise InsufficientDataError(f"only {k} rows are visible in both series; need at least 2")
    r = pcc(data.y_a[rows], data.y_b[rows])
    return CorrelationEstimate(NAIVE, r, k, {"n_both_visible": k})


def _pair_label(data: PairedCensoredData, config: CorrelationConfig) -> tuple:
    lab = relative_sign(data.label(data.name_b), data.label(data.name_a))
    if lab != UNKNOWN or not config.infer_pair_sign:
        return lab, "labels"
    try:
        r = naive_pcc(data).r
    except (InsufficientDataError, UndefinedCorrelationError):
        return UNKNOWN, "inferred"
    if r == 0:
        return UNKNOWN, "inferred"
    return (POSITIVE if r > 0 else NEGATIVE), "inferred"


def _fit_stage(stage, X, y, visible, theta, labels, kind, config):
    if kind == ASYMMETRIC:
        X, i_pos = preprocess_signs(X, labels)
    else:
        i_pos = []
    try:
        fitted = fit_tobit(X, y, visible, theta, kind=kind, lam=config.lam, positive=i_pos, config=config.em)
    except (EMFailure, TobitError) as exc:
        raise StageFailure(f"{stage} fit failed: {exc}", stage, exc) from exc
    return fitted.impute(X, y, visible), fitted


def tobit_pcc(
    data: PairedCensoredData, prior_kind: str = ASYMMETRIC, config: Optional[CorrelationConfig] = None
) -> CorrelationEstimate:
    """Two-stage Tobit imputation followed by a full-sample correlation.

    Stage 1 completes B from the side variables; stage 2 completes A from
    the side variables plus the completed B.
    """
    if prior_kind not in (SYMMETRIC, ASYMMETRIC):
        raise ValueError(f"unknown prior kind {prior_kind!r}")
    config = config or CorrelationConfig()
    if data.side_info.shape[0] == 0:
        raise ValueError("tobit_pcc needs at least one side variable")
    S = data.side_info

    yb_hat, fit_b = _fit_stage(
        "stage1", S, data.y_b, data.visible_b, data.theta_b, data.side_labels(data.name_b), prior_kind, config
    )
    pair_label, pair_source = _pair_label(data, config)
    X2 = np.vstack([S, yb_hat[None, :]])
    labels2 = data.side_labels(data.name_a) + [pair_label]
    ya_hat, fit_a = _fit_stage("stage2", X2, data.y_a, data.visible_a, data.theta_a, labels2, prior_kind, config)

    r = pcc(ya_hat, yb_hat)
    method = ASYM_TOBIT if prior_kind == ASYMMETRIC else SYM_TOBIT
    diagnostics = {
        "n_imputed_a": int((~data.visible_a).sum()),
        "n_imputed_b": int((~data.visible_b).sum()),
        "pair_sign": pair_label,
        "pair_sign_source": pair_source,
        "stage1_loglik": fit_b.trace.logliks.tolist(),
        "stage2_loglik": fit_a.trace.logliks.tolist(),
    }
    return CorrelationEstimate(method, r, data.n, diagnostics)


def estimate(data: PairedCensoredData, method: str, config: Optional[CorrelationConfig] = None) -> CorrelationEstimate:
    if method == NAIVE:
        return naive_pcc(data)
    if method == SYM_TOBIT:
        return tobit_pcc(data, SYMMETRIC, config)
    if method == ASYM_TOBIT:
        return tobit_pcc(data, ASYMMETRIC, config)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
