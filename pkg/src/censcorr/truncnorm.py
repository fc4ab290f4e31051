"""Standard normal helpers and moments of the upper-truncated normal.

Every function broadcasts over numpy arrays; scalar inputs give scalar
outputs. The upper-truncated normal is ``N(mu, 1/beta)`` conditioned on
``y < theta``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

_SQRT_2PI = np.sqrt(2.0 * np.pi)
_SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)
_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)

# Below this standardized point the conditional variance is taken from its
# asymptotic series; the closed form cancels catastrophically.
_VAR_SERIES_CUTOFF = -30.0
_VAR_SERIES = (1.0, -6.0, 50.0, -518.0, 6354.0)


def _scalarize(x):
    return x.item() if isinstance(x, np.ndarray) and x.ndim == 0 else x


def _check_beta(beta):
    beta = np.asarray(beta, dtype=float)
    if np.any(~(beta > 0)) or np.any(~np.isfinite(beta)):
        raise ValueError("precision beta must be finite and > 0")
    return beta


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return _scalarize(np.exp(-0.5 * x * x) / _SQRT_2PI)


def std_normal_logpdf(x):
    x = np.asarray(x, dtype=float)
    return _scalarize(-0.5 * x * x - _LOG_SQRT_2PI)


def std_normal_cdf(x):
    # ndtr goes through erfc for negative arguments, so the lower tail keeps
    # full relative precision down to the underflow threshold.
    return _scalarize(special.ndtr(np.asarray(x, dtype=float)))


def std_normal_logcdf(x):
    return _scalarize(special.log_ndtr(np.asarray(x, dtype=float)))


def inverse_mills_ratio(x):
    """phi(x) / Phi(x), stable for arbitrarily negative x.

    For x < 0 the ratio is rewritten with the scaled complementary error
    function, ``Phi(x) = erfcx(-x/sqrt 2) * exp(-x^2/2) / 2``, so the Gaussian
    factors cancel analytically instead of numerically.
    """
    x = np.asarray(x, dtype=float)
    neg = x < 0
    out = np.empty_like(x)
    out[neg] = _SQRT_2_OVER_PI / special.erfcx(-x[neg] / np.sqrt(2.0))
    xp = x[~neg]
    out[~neg] = np.exp(-0.5 * xp * xp) / _SQRT_2PI / special.ndtr(xp)
    return _scalarize(out)


def standardized_truncation_point(mu, beta, theta):
    """xi = (theta - mu) * sqrt(beta)."""
    beta = _check_beta(beta)
    return (np.asarray(theta, dtype=float) - np.asarray(mu, dtype=float)) * np.sqrt(beta)


def truncated_density(y, mu, beta, theta):
    beta = _check_beta(beta)
    y = np.asarray(y, dtype=float)
    sb = np.sqrt(beta)
    xi = (theta - np.asarray(mu, dtype=float)) * sb
    logf = np.log(sb) + std_normal_logpdf(sb * (y - mu)) - special.log_ndtr(xi)
    return _scalarize(np.where(y < theta, np.exp(logf), 0.0))


def upper_truncated_mean(mu, beta, theta):
    """E[y | y < theta] for y ~ N(mu, 1/beta)."""
    beta = _check_beta(beta)
    xi = standardized_truncation_point(mu, beta, theta)
    return _scalarize(np.asarray(mu, dtype=float) - inverse_mills_ratio(xi) / np.sqrt(beta))


def upper_truncated_second_moment(mu, beta, theta):
    """E[y^2 | y < theta] for y ~ N(mu, 1/beta)."""
    beta = _check_beta(beta)
    mu = np.asarray(mu, dtype=float)
    xi = standardized_truncation_point(mu, beta, theta)
    lam = inverse_mills_ratio(xi)
    return _scalarize((1.0 - xi * lam) / beta + mu * mu - 2.0 * lam * mu / np.sqrt(beta))


def upper_truncated_variance(mu, beta, theta):
    """Var[y | y < theta], i.e. second moment minus squared mean.

    Evaluated as ``(1 - lam * (xi + lam)) / beta`` which avoids the large
    ``mu^2`` terms cancelling; in the deep tail an asymptotic series in
    ``1/xi^2`` replaces it.
    """
    beta = _check_beta(beta)
    xi = np.asarray(standardized_truncation_point(mu, beta, theta), dtype=float)
    lam = np.asarray(inverse_mills_ratio(xi))
    scaled = 1.0 - lam * (xi + lam)
    deep = xi < _VAR_SERIES_CUTOFF
    if np.any(deep):
        s = 1.0 / xi[deep] ** 2
        series = np.zeros_like(s)
        for c in reversed(_VAR_SERIES):
            series = (series + c) * s
        scaled = np.where(deep, 0.0, scaled)
        scaled[deep] = series
    return _scalarize(np.maximum(scaled, 0.0) / beta)


@dataclass(frozen=True)
class TruncParams:
    """Location, precision and upper truncation point of a truncated normal."""

    mu: float
    beta: float
    theta: float

    def __post_init__(self):
        if not (self.beta > 0 and np.isfinite(self.beta)):
            raise ValueError(f"beta must be finite and > 0, got {self.beta}")
        if not np.isfinite(self.theta):
            raise ValueError(f"theta must be finite, got {self.theta}")
        if not np.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")

    @property
    def xi(self) -> float:
        return float(standardized_truncation_point(self.mu, self.beta, self.theta))

    def density(self, y):
        return truncated_density(y, self.mu, self.beta, self.theta)

    def mean(self) -> float:
        return float(upper_truncated_mean(self.mu, self.beta, self.theta))

    def second_moment(self) -> float:
        return float(upper_truncated_second_moment(self.mu, self.beta, self.theta))

    def variance(self) -> float:
        return float(upper_truncated_variance(self.mu, self.beta, self.theta))
