"""Left-censored (Tobit) linear regression fitted by EM.

Data follow the column convention: a design matrix is ``d x n`` with one
column per sample. Targets below the detection limit ``theta`` are hidden.

The M-step for the coefficients maximizes the EM surrogate

    Q(w) = log p(w) - beta/2 * ||X^T w - y_bar||^2 + const.

With the asymmetric normal prior (separate quadratic penalties on the
positive and negative parts of each coefficient) it is solved as the NNLS
problem over ``[w_plus; w_minus] >= 0`` assembled by ``build_mstep_system``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import linalg, special

from . import truncnorm as tn
from .nnls import NnlsError, NnlsProblem, default_tol, solve_nnls, solve_nnls_gram

logger = logging.getLogger(__name__)

SYMMETRIC = "symmetric"
ASYMMETRIC = "asymmetric"
# the asymmetric prior multiplies lambda by this on the disfavoured side
ASYM_FACTOR = 100.0


class TobitError(ValueError):
    pass


class EMFailure(RuntimeError):
    """A step of the EM loop failed; ``trace`` holds the completed iterations."""

    def __init__(self, message, trace, stage):
        super().__init__(message)
        self.trace = trace
        self.stage = stage


@dataclass(frozen=True)
class TobitModel:
    w: np.ndarray
    beta: float

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float).reshape(-1)
        if not np.all(np.isfinite(w)):
            raise TobitError("coefficients must be finite")
        if not (self.beta > 0 and np.isfinite(self.beta)):
            raise TobitError(f"beta must be finite and > 0, got {self.beta}")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "beta", float(self.beta))


@dataclass(frozen=True)
class RegressionData:
    """Visible and hidden samples of one censored regression problem."""

    X_visible: np.ndarray
    y_visible: np.ndarray
    X_hidden: np.ndarray
    theta: float

    def __post_init__(self):
        Xv = np.atleast_2d(np.asarray(self.X_visible, dtype=float))
        yv = np.asarray(self.y_visible, dtype=float).reshape(-1)
        Xh = np.asarray(self.X_hidden, dtype=float)
        if Xh.size == 0:
            Xh = np.zeros((Xv.shape[0], 0))
        Xh = np.atleast_2d(Xh)
        if Xv.shape[1] != yv.shape[0]:
            raise TobitError(f"X_visible has {Xv.shape[1]} columns but y_visible has {yv.shape[0]} entries")
        if yv.shape[0] < 1:
            raise TobitError("at least one visible target is required")
        if Xh.shape[0] != Xv.shape[0]:
            raise TobitError(f"feature dimension mismatch: {Xv.shape[0]} vs {Xh.shape[0]}")
        if not np.isfinite(self.theta):
            raise TobitError("theta must be finite")
        for arr in (Xv, yv, Xh):
            if not np.all(np.isfinite(arr)):
                raise TobitError("data must be finite")
        if np.any(yv < self.theta):
            raise TobitError("visible targets must not lie below the detection limit")
        object.__setattr__(self, "X_visible", Xv)
        object.__setattr__(self, "y_visible", yv)
        object.__setattr__(self, "X_hidden", Xh)
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "_X", np.hstack([Xv, Xh]))

    @property
    def d(self) -> int:
        return self.X_visible.shape[0]

    @property
    def n_visible(self) -> int:
        return self.X_visible.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.X_hidden.shape[1]

    @property
    def n(self) -> int:
        return self.n_visible + self.n_hidden

    @property
    def X(self) -> np.ndarray:
        """Full design, visible columns first."""
        return self._X

    @classmethod
    def from_mask(cls, X, y, visible, theta) -> "RegressionData":
        """Split a ``d x n`` design by a visibility mask; hidden ``y`` is ignored."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        visible = np.asarray(visible, dtype=bool)
        y = np.asarray(y, dtype=float)
        return cls(X[:, visible], y[visible], X[:, ~visible], theta)


@dataclass(frozen=True)
class PriorSpec:
    kind: str
    lam: float
    lambda_pos: np.ndarray
    lambda_neg: np.ndarray

    def __post_init__(self):
        if self.kind not in (SYMMETRIC, ASYMMETRIC):
            raise TobitError(f"unknown prior kind {self.kind!r}")
        lp = np.asarray(self.lambda_pos, dtype=float).reshape(-1)
        ln = np.asarray(self.lambda_neg, dtype=float).reshape(-1)
        if lp.shape != ln.shape:
            raise TobitError("lambda_pos and lambda_neg must have equal length")
        if not (self.lam > 0) or np.any(~(lp > 0)) or np.any(~(ln > 0)):
            raise TobitError("regularization weights must be > 0")
        if self.kind == SYMMETRIC and not (np.all(lp == self.lam) and np.all(ln == self.lam)):
            raise TobitError("a symmetric prior needs lambda_pos = lambda_neg = lambda")
        object.__setattr__(self, "lambda_pos", lp)
        object.__setattr__(self, "lambda_neg", ln)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def d(self) -> int:
        return self.lambda_pos.shape[0]

    @property
    def is_balanced(self) -> bool:
        """True when both sides carry the same penalty, i.e. a normal prior."""
        return bool(np.array_equal(self.lambda_pos, self.lambda_neg))

    @classmethod
    def symmetric(cls, lam: float, d: int) -> "PriorSpec":
        return cls(SYMMETRIC, lam, np.full(d, float(lam)), np.full(d, float(lam)))

    @classmethod
    def asymmetric(cls, lambda_pos, lambda_neg, lam: Optional[float] = None) -> "PriorSpec":
        lp = np.asarray(lambda_pos, dtype=float)
        return cls(ASYMMETRIC, float(np.min(lp)) if lam is None else lam, lp, lambda_neg)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "lambda": self.lam,
            "lambda_pos": self.lambda_pos.tolist(),
            "lambda_neg": self.lambda_neg.tolist(),
        }


@dataclass
class EMConfig:
    max_iters: int = 30
    loglik_tol: float = 1e-8
    init_policy: str = "zeros"
    seed: int = 0
    # "auto": ridge for the symmetric prior, NNLS for the asymmetric one
    mstep_solver: str = "auto"

    def __post_init__(self):
        if self.max_iters < 1:
            raise TobitError("max_iters must be >= 1")
        if self.loglik_tol < 0:
            raise TobitError("loglik_tol must be >= 0")
        if self.init_policy not in ("zeros", "visible-ols"):
            raise TobitError(f"unknown init_policy {self.init_policy!r}")
        if self.mstep_solver not in ("auto", "nnls", "ridge"):
            raise TobitError(f"unknown mstep_solver {self.mstep_solver!r}")


@dataclass
class IterationRecord:
    loglik: float
    beta: float
    w_norm: float
    nnls_iterations: int
    y_bar_norm: float
    v: float


@dataclass
class EMTrace:
    initial_loglik: float = float("nan")
    records: list = field(default_factory=list)
    converged: bool = False

    @property
    def logliks(self) -> np.ndarray:
        return np.array([self.initial_loglik] + [r.loglik for r in self.records])

    def __len__(self):
        return len(self.records)

    def to_list(self) -> list:
        return [asdict(r) for r in self.records]


# ---------------------------------------------------------------- objectives


def tobit_loglik(model: TobitModel, data: RegressionData) -> float:
    if model.w.shape[0] != data.d:
        raise TobitError(f"model has {model.w.shape[0]} coefficients, data has {data.d} features")
    sb = np.sqrt(model.beta)
    resid = data.y_visible - data.X_visible.T @ model.w
    ll = 0.5 * data.n_visible * np.log(model.beta)
    ll += float(np.sum(tn.std_normal_logpdf(sb * resid)))
    if data.n_hidden:
        xi = sb * (data.theta - data.X_hidden.T @ model.w)
        ll += float(np.sum(special.log_ndtr(xi)))
    return float(ll)


def log_prior_normalizers(prior: PriorSpec) -> np.ndarray:
    """log Z_h with Z_h = sqrt(pi / 2 lambda_pos_h) + sqrt(pi / 2 lambda_neg_h)."""
    return np.log(np.sqrt(np.pi / (2 * prior.lambda_pos)) + np.sqrt(np.pi / (2 * prior.lambda_neg)))


def log_prior(w, prior: PriorSpec) -> float:
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape[0] != prior.d:
        raise TobitError(f"w has length {w.shape[0]}, prior has {prior.d}")
    wp = np.maximum(w, 0.0)
    wn = np.maximum(-w, 0.0)
    quad = 0.5 * (prior.lambda_pos * wp**2 + prior.lambda_neg * wn**2)
    return float(-np.sum(quad) - np.sum(log_prior_normalizers(prior)))


def regularized_loglik(model: TobitModel, data: RegressionData, prior: PriorSpec) -> float:
    return log_prior(model.w, prior) + tobit_loglik(model, data)


def q_function(w, beta, data: RegressionData, prior: PriorSpec, y_bar, v) -> float:
    """EM surrogate evaluated with E-step summaries ``y_bar`` and ``v``."""
    w = np.asarray(w, dtype=float)
    resid = data.X.T @ w - y_bar
    return (
        log_prior(w, prior)
        + 0.5 * data.n * np.log(beta)
        - 0.5 * data.n * np.log(2 * np.pi)
        - 0.5 * beta * (float(resid @ resid) + v)
    )


# ---------------------------------------------------------------- EM pieces


def e_step(model: TobitModel, data: RegressionData):
    """Expected completed targets and their total conditional variance.

    Returns ``(y_bar, v)``: ``y_bar`` stacks the visible targets with the
    truncated-normal means of the hidden ones, ``v`` sums the hidden
    conditional variances.
    """
    if data.n_hidden == 0:
        return data.y_visible.copy(), 0.0
    mu = data.X_hidden.T @ model.w
    means = tn.upper_truncated_mean(mu, model.beta, data.theta)
    variances = tn.upper_truncated_variance(mu, model.beta, data.theta)
    y_bar = np.concatenate([data.y_visible, np.atleast_1d(means)])
    return y_bar, float(np.sum(variances))


def build_mstep_system(data: RegressionData, prior: PriorSpec, beta_prev: float, y_bar) -> NnlsProblem:
    """NNLS instance whose solution ``[w_plus; w_minus]`` maximizes Q over w.

    ``A`` is ``2d x (n + 2d)``::

        [[ X, diag(sqrt(lambda_pos / beta)), 0 ],
         [-X, 0, diag(sqrt(lambda_neg / beta)) ]]

    and ``b = [y_bar; 0]``, so that ``||A^T [w+; w-] - b||^2`` equals
    ``||X^T w - y_bar||^2 + sum(lambda_pos w+^2 + lambda_neg w-^2) / beta``.
    """
    if not beta_prev > 0:
        raise TobitError("beta_prev must be > 0")
    y_bar = np.asarray(y_bar, dtype=float).reshape(-1)
    d, n = data.d, data.n
    if prior.d != d:
        raise TobitError(f"prior has {prior.d} entries, data has {d} features")
    if y_bar.shape[0] != n:
        raise TobitError(f"y_bar has length {y_bar.shape[0]}, expected {n}")
    X = data.X
    A = np.zeros((2 * d, n + 2 * d))
    A[:d, :n] = X
    A[d:, :n] = -X
    idx = np.arange(d)
    A[idx, n + idx] = np.sqrt(prior.lambda_pos / beta_prev)
    A[d + idx, n + d + idx] = np.sqrt(prior.lambda_neg / beta_prev)
    b = np.concatenate([y_bar, np.zeros(2 * d)])
    return NnlsProblem(A, b)


def _ridge_from_gram(K, Xy, lam_diag, beta_prev):
    G = K.copy()
    G[np.diag_indices_from(G)] += lam_diag / beta_prev
    return linalg.solve(G, Xy, assume_a="pos", check_finite=False)


def _ridge_solve(data: RegressionData, lam_diag, beta_prev, y_bar):
    X = data.X
    return _ridge_from_gram(X @ X.T, X @ y_bar, lam_diag, beta_prev)


def _orthant_seed(K, Xy, prior: PriorSpec, beta_prev, w, rounds=3):
    """Refine a start for the asymmetric M-step by sign-wise ridge solves.

    Inside one sign orthant the objective is an ordinary ridge problem, so
    re-solving with the penalties picked by the current signs reaches the
    optimum once the sign pattern stops changing.
    """
    pos = w >= 0
    for _ in range(rounds):
        w = _ridge_from_gram(K, Xy, np.where(pos, prior.lambda_pos, prior.lambda_neg), beta_prev)
        new_pos = w >= 0
        if np.array_equal(new_pos, pos):
            break
        pos = new_pos
    return w


def _gram_from_blocks(K, Xy, prior: PriorSpec, beta_prev):
    d = K.shape[0]
    G = np.empty((2 * d, 2 * d))
    G[:d, :d] = K
    G[d:, d:] = K
    np.negative(K, out=G[:d, d:])
    G[d:, :d] = G[:d, d:]
    G.flat[:: 2 * d + 1] += np.concatenate([prior.lambda_pos, prior.lambda_neg]) / beta_prev
    return G, np.concatenate([Xy, -Xy])


def mstep_gram(data: RegressionData, prior: PriorSpec, beta_prev: float, y_bar):
    """``(A A^T, A b, b^T b)`` for the system of ``build_mstep_system``.

    Assembled from ``X X^T`` and ``X y_bar`` without forming ``A``.
    """
    if not beta_prev > 0:
        raise TobitError("beta_prev must be > 0")
    y_bar = np.asarray(y_bar, dtype=float).reshape(-1)
    X = data.X
    G, c = _gram_from_blocks(X @ X.T, X @ y_bar, prior, beta_prev)
    return G, c, float(y_bar @ y_bar)


def m_step_w(
    data: RegressionData,
    prior: PriorSpec,
    beta_prev: float,
    y_bar,
    solver: str = "nnls",
    warm_start=None,
    return_info: bool = False,
    nnls_method: str = "gram",
):
    """Coefficient update of the M-step.

    ``solver="nnls"`` solves NNLS(A, b) for the system of
    ``build_mstep_system`` and returns ``w_plus - w_minus``; with
    ``nnls_method="gram"`` the solver only sees ``A A^T`` and ``A b``.
    ``"ridge"`` (balanced priors only) solves the normal equations directly
    and ``"auto"`` picks ridge for the symmetric prior kind.
    """
    if solver == "auto":
        solver = "ridge" if prior.kind == SYMMETRIC else "nnls"
    if not beta_prev > 0:
        raise TobitError("beta_prev must be > 0")
    y_bar = np.asarray(y_bar, dtype=float).reshape(-1)
    if prior.d != data.d or y_bar.shape[0] != data.n:
        raise TobitError("dimension mismatch between data, prior and y_bar")
    X = data.X
    K = X @ X.T
    Xy = X @ y_bar
    if solver == "ridge":
        if not prior.is_balanced:
            raise TobitError("ridge M-step needs lambda_pos == lambda_neg")
        w = _ridge_from_gram(K, Xy, prior.lambda_pos, beta_prev)
        return (w, 0) if return_info else w
    if solver != "nnls":
        raise TobitError(f"unknown solver {solver!r}")
    ws = None if warm_start is None else np.asarray(warm_start, dtype=float)
    if ws is None or not ws.any():
        ws = _orthant_seed(K, Xy, prior, beta_prev, np.zeros(data.d))
    x0 = np.concatenate([np.maximum(ws, 0.0), np.maximum(-ws, 0.0)])
    if nnls_method == "gram":
        G, c = _gram_from_blocks(K, Xy, prior, beta_prev)
        sol = solve_nnls_gram(G, c, float(y_bar @ y_bar), tol=default_tol(y_bar), x0=x0)
    else:
        sol = solve_nnls(build_mstep_system(data, prior, beta_prev, y_bar), x0=x0, method=nnls_method)
    d = data.d
    w = sol.x[:d] - sol.x[d:]
    return (w, sol.iterations) if return_info else w


def m_step_beta(data: RegressionData, w, y_bar, v: float) -> float:
    resid = data.X.T @ np.asarray(w, dtype=float) - y_bar
    denom = float(resid @ resid) + v
    if not denom > 0:
        raise TobitError(
            "beta update has a zero denominator (exact interpolation with no hidden variance); "
            "add jitter to the targets or a larger regularization"
        )
    return data.n / denom


def _initial_model(data: RegressionData, config: EMConfig) -> TobitModel:
    var = float(np.var(data.y_visible)) if data.n_visible > 1 else 0.0
    beta0 = 1.0 / max(var, 1e-6)
    if config.init_policy == "visible-ols":
        w0 = np.linalg.lstsq(data.X_visible.T, data.y_visible, rcond=None)[0]
    else:
        w0 = np.zeros(data.d)
    return TobitModel(w0, beta0)


def fit_em(data: RegressionData, prior: PriorSpec, config: Optional[EMConfig] = None, init: Optional[TobitModel] = None):
    """Fit a Tobit model by EM; returns ``(model, trace)``.

    Each iteration runs the E-step, the coefficient update, then the
    closed-form precision update. Stops after ``config.max_iters``
    iterations or once the relative change of the regularized
    log-likelihood drops below ``config.loglik_tol``.
    """
    config = config or EMConfig()
    if prior.d != data.d:
        raise TobitError(f"prior has {prior.d} entries, data has {data.d} features")
    model = init if init is not None else _initial_model(data, config)
    trace = EMTrace(initial_loglik=regularized_loglik(model, data, prior))
    prev = trace.initial_loglik
    for t in range(config.max_iters):
        stage = "e_step"
        try:
            y_bar, v = e_step(model, data)
            stage = "m_step_w"
            w, nnls_iters = m_step_w(
                data, prior, model.beta, y_bar, solver=config.mstep_solver, warm_start=model.w, return_info=True
            )
            stage = "m_step_beta"
            beta = m_step_beta(data, w, y_bar, v)
            model = TobitModel(w, beta)
        except (TobitError, NnlsError, FloatingPointError, np.linalg.LinAlgError) as exc:
            raise EMFailure(f"EM iteration {t + 1} failed in {stage}: {exc}", trace, stage) from exc
        ll = regularized_loglik(model, data, prior)
        trace.records.append(
            IterationRecord(
                loglik=ll,
                beta=beta,
                w_norm=float(np.linalg.norm(w)),
                nnls_iterations=int(nnls_iters),
                y_bar_norm=float(np.linalg.norm(y_bar)),
                v=v,
            )
        )
        if abs(ll - prev) / (1.0 + abs(ll)) < config.loglik_tol:
            trace.converged = True
            break
        prev = ll
    return model, trace


def impute(model: TobitModel, data: RegressionData) -> np.ndarray:
    """Visible targets followed by conditional means of the hidden ones."""
    return e_step(model, data)[0]


def build_lambda_vectors(sign_sets, lam: float, d: int):
    """Per-coefficient penalties for the asymmetric prior.

    ``sign_sets = (I_pos, I_neg)`` holds zero-based feature indices known to
    correlate positively / negatively with the target. Coefficients expected
    to be positive get a 100x penalty on their negative part and vice versa.
    """
    i_pos, i_neg = (set(int(i) for i in s) for s in sign_sets)
    if i_pos & i_neg:
        raise TobitError(f"index sets overlap: {sorted(i_pos & i_neg)}")
    if any(i < 0 or i >= d for i in i_pos | i_neg):
        raise TobitError(f"indices must lie in [0, {d})")
    lambda_pos = np.full(d, float(lam))
    lambda_neg = np.full(d, float(lam))
    lambda_pos[sorted(i_neg)] *= ASYM_FACTOR
    lambda_neg[sorted(i_pos)] *= ASYM_FACTOR
    return lambda_pos, lambda_neg


# ------------------------------------------------------- standardized front end


@dataclass
class FittedTobit:
    """A model fitted on z-scored features with an appended intercept.

    ``model.w`` lives in the scaled space; its last entry is the intercept.
    """

    model: TobitModel
    prior: PriorSpec
    trace: EMTrace
    feature_means: np.ndarray
    feature_stds: np.ndarray
    target_mean: float
    target_std: float
    theta: float

    def _scaled_design(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Z = (X - self.feature_means[:, None]) / self.feature_stds[:, None]
        return np.vstack([Z, np.ones((1, X.shape[1]))])

    @property
    def coef(self) -> np.ndarray:
        """Feature weights in original units."""
        return self.target_std * self.model.w[:-1] / self.feature_stds

    @property
    def intercept(self) -> float:
        w = self.model.w
        return float(self.target_mean + self.target_std * (w[-1] - np.sum(w[:-1] * self.feature_means / self.feature_stds)))

    @property
    def sigma(self) -> float:
        """Noise standard deviation in original units."""
        return self.target_std / np.sqrt(self.model.beta)

    def predict(self, X) -> np.ndarray:
        return self.target_mean + self.target_std * (self._scaled_design(X).T @ self.model.w)

    def impute(self, X, y, visible) -> np.ndarray:
        """Copy visible entries and replace hidden ones by E[y | y < theta, x]."""
        visible = np.asarray(visible, dtype=bool)
        out = np.array(y, dtype=float, copy=True)
        if np.all(visible):
            return out
        Zh = self._scaled_design(np.atleast_2d(np.asarray(X, dtype=float))[:, ~visible])
        theta_s = (self.theta - self.target_mean) / self.target_std
        mu = Zh.T @ self.model.w
        out[~visible] = self.target_mean + self.target_std * np.atleast_1d(
            tn.upper_truncated_mean(mu, self.model.beta, theta_s)
        )
        return out

    def to_dict(self) -> dict:
        return {
            "w": self.model.w.tolist(),
            "beta": self.model.beta,
            "prior": self.prior.to_dict(),
            "standardization": {
                "means": self.feature_means.tolist(),
                "stds": self.feature_stds.tolist(),
                "target_mean": self.target_mean,
                "target_std": self.target_std,
            },
            "trace": self.trace.to_list(),
            "theta": self.theta,
            "coef": self.coef.tolist(),
            "intercept": self.intercept,
            "sigma": self.sigma,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _visible_stats(values, visible):
    """Mean/std over visible columns, falling back to all columns when degenerate."""
    vis = values[..., visible]
    mean = vis.mean(axis=-1)
    std = vis.std(axis=-1) if vis.shape[-1] > 1 else np.zeros_like(mean)
    fallback = ~(std > 1e-12)
    if np.any(fallback):
        std_all = np.atleast_1d(values.std(axis=-1))
        std = np.where(fallback, std_all, std)
        std = np.where(std > 1e-12, std, 1.0)
    return mean, std


def fit_tobit(
    X,
    y,
    visible,
    theta: float,
    kind: str = SYMMETRIC,
    lam: float = 1.0,
    positive: Iterable[int] = (),
    negative: Iterable[int] = (),
    config: Optional[EMConfig] = None,
) -> FittedTobit:
    """Fit a censored regression of ``y`` on the rows of ``X`` (``p x n``).

    Features and target are standardized with visible-sample statistics and
    a constant feature is appended. ``positive``/``negative`` list feature
    rows whose coefficient sign is known; they only matter for the
    asymmetric prior. The intercept always gets the plain penalty ``lam``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    visible = np.asarray(visible, dtype=bool)
    if X.shape[1] != y.shape[0] or visible.shape[0] != y.shape[0]:
        raise TobitError("X, y and visible disagree on the number of samples")
    n_v = int(visible.sum())
    if n_v == 0:
        raise TobitError("no visible targets: the censored likelihood has no anchored scale")
    p = X.shape[0]
    f_mean, f_std = _visible_stats(X, visible)
    t_mean, t_std = _visible_stats(y[None, :], visible)
    t_mean, t_std = float(t_mean[0]), float(t_std[0])
    Z = np.vstack([(X - f_mean[:, None]) / f_std[:, None], np.ones((1, y.shape[0]))])
    t = (y - t_mean) / t_std
    theta_s = (theta - t_mean) / t_std
    data = RegressionData.from_mask(Z, np.where(visible, t, theta_s), visible, theta_s)

    if kind == SYMMETRIC:
        prior = PriorSpec.symmetric(lam, p + 1)
    elif kind == ASYMMETRIC:
        lp, ln = build_lambda_vectors((positive, negative), lam, p + 1)
        prior = PriorSpec(ASYMMETRIC, lam, lp, ln)
    else:
        raise TobitError(f"unknown prior kind {kind!r}")
    model, trace = fit_em(data, prior, config)
    return FittedTobit(model, prior, trace, f_mean, f_std, t_mean, t_std, float(theta))
