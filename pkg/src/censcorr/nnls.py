"""Active-set (Lawson-Hanson) nonnegative least squares.

Problems use the transposed layout ``min_{x >= 0} ||A^T x - b||`` with
``A`` of shape ``(m, n)``: each of the ``m`` rows of ``A`` is the column of
the residual map belonging to one unknown.

Two backends share the active-set loop. ``"qr"`` re-factors the passive
columns of ``A^T`` for every subproblem. ``"gram"`` works on ``A A^T`` and
``A b`` only (the Bro-de Jong arrangement), which pays off when the Gram
matrix is cheap to assemble or reused, see ``solve_nnls_gram``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

logger = logging.getLogger(__name__)


class NnlsError(RuntimeError):
    pass


class NnlsIterationLimit(NnlsError):
    """Raised when the outer loop hits its cap; carries the best iterate."""

    def __init__(self, message, x, kkt_violation, iterations):
        super().__init__(message)
        self.x = x
        self.kkt_violation = kkt_violation
        self.iterations = iterations


@dataclass(frozen=True)
class NnlsProblem:
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise ValueError(f"A must be a non-empty 2-D array, got shape {A.shape}")
        if b.shape[0] != A.shape[1]:
            raise ValueError(f"b has length {b.shape[0]}, expected {A.shape[1]}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("A and b must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def residual(self, x) -> np.ndarray:
        return self.A.T @ x - self.b

    def objective(self, x) -> float:
        """Half the squared residual norm."""
        r = self.residual(x)
        return 0.5 * float(r @ r)

    def gradient(self, x) -> np.ndarray:
        return self.A @ self.residual(x)

    def default_tol(self) -> float:
        return default_tol(self.b)


@dataclass
class NnlsSolution:
    x: np.ndarray
    residual_norm: float
    iterations: int
    kkt_violation: float
    objective_trace: list = field(default_factory=list)


def default_tol(b) -> float:
    return 1e-10 * (1.0 + float(np.max(np.abs(b))))


def _kkt_from_gradient(x, g) -> float:
    per = np.where(x == 0, -g, np.abs(g))
    return max(float(per.max()), 0.0)


def kkt_violation(problem: NnlsProblem, x) -> float:
    """Largest violation of the NNLS optimality conditions at ``x``.

    With ``g = A (A^T x - b)``: zero entries need ``g_i >= 0`` and positive
    entries need ``g_i = 0``.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != problem.m:
        raise ValueError(f"x has length {x.shape[0]}, expected {problem.m}")
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    return _kkt_from_gradient(x, problem.gradient(x))


class _QRBackend:
    def __init__(self, problem: NnlsProblem):
        self.M = problem.A.T
        self.b = problem.b

    def solve(self, passive, rhs=None):
        Mp = self.M[:, passive]
        rhs = self.b if rhs is None else rhs
        q, r = np.linalg.qr(Mp)
        diag = np.abs(np.diag(r))
        if diag.size and diag.min() > 1e-12 * max(diag.max(), 1.0):
            return solve_triangular(r, q.T @ rhs, check_finite=False)
        return np.linalg.lstsq(Mp, rhs, rcond=None)[0]

    def dual(self, x):
        return self.M.T @ (self.b - self.M @ x)

    def refine(self, passive, x):
        return self.solve(passive, self.b - self.M @ x)

    def objective(self, x):
        r = self.M @ x - self.b
        return 0.5 * float(r @ r)


class _GramBackend:
    def __init__(self, gram, atb, btb):
        self.G = gram
        self.c = atb
        self.btb = btb
        self._key = None
        self._factor = None

    def solve(self, passive, rhs=None):
        key = passive.tobytes()
        if key != self._key:
            # the refinement step re-solves on the same passive set
            self._key = key
            idx = np.flatnonzero(passive)
            self._idx = idx
            Gp = self.G[idx][:, idx]
            if idx.size <= 32:
                self._factor = ("inv", np.linalg.inv(Gp))
            else:
                try:
                    self._factor = ("chol", cho_factor(Gp, check_finite=False))
                except np.linalg.LinAlgError:
                    self._factor = ("lstsq", Gp)
        rhs = self.c[self._idx] if rhs is None else rhs
        how, f = self._factor
        if how == "inv":
            return f @ rhs
        if how == "chol":
            return cho_solve(f, rhs, check_finite=False)
        return np.linalg.lstsq(f, rhs, rcond=None)[0]

    def dual(self, x):
        return self.c - self.G @ x

    def refine(self, passive, x):
        return self.solve(passive, self.dual(x)[passive])

    def objective(self, x):
        return 0.5 * float(x @ (self.G @ x)) - float(self.c @ x) + 0.5 * self.btb


def _active_set(backend, m, tol, max_iter, x0, callback):
    if x0 is None:
        x = np.zeros(m)
    else:
        x = np.asarray(x0, dtype=float).reshape(-1).copy()
        if x.shape[0] != m or (x < 0).any() or not np.isfinite(x).all():
            raise ValueError("x0 must be a finite nonnegative vector of length m")
    passive = x > 0
    trace = []

    def feasible_step(passive, x, zp=None):
        # Move toward the unconstrained solution on the passive set, dropping
        # variables that hit zero, until that solution is strictly positive.
        while True:
            z = np.zeros(m)
            if zp is not None:
                z[passive] = zp
                zp = None
            elif passive.any():
                z[passive] = backend.solve(passive)
            bad = passive & (z <= 0)
            if not bad.any():
                return passive, z
            ratio = x[bad] / (x[bad] - z[bad])
            alpha = float(np.min(ratio))
            x = x + alpha * (z - x)
            drop = passive & (x <= 0)
            drop[np.flatnonzero(bad)[ratio <= alpha]] = True
            passive = passive & ~drop
            x[~passive] = 0.0

    if passive.any():
        passive, x = feasible_step(passive, x)

    iterations = 0
    while True:
        free = ~passive
        if not free.any():
            break
        candidates = np.where(free, backend.dual(x), -np.inf)
        entered = False
        while True:
            # argmax takes the smallest index among ties
            j = int(np.argmax(candidates))
            if candidates[j] <= tol:
                break
            trial = passive.copy()
            trial[j] = True
            zp = backend.solve(trial)
            # the entering variable is positive in exact arithmetic; a
            # nonpositive value is round-off, so pass over it this round
            if zp[np.count_nonzero(trial[:j])] <= 0:
                candidates[j] = -np.inf
                continue
            entered = True
            break
        if not entered:
            break
        iterations += 1
        if iterations > max_iter:
            raise NnlsIterationLimit(
                f"NNLS did not converge in {max_iter} iterations",
                x=x,
                kkt_violation=_kkt_from_gradient(x, -backend.dual(x)),
                iterations=iterations - 1,
            )
        passive, x = feasible_step(trial, x, zp)
        obj = backend.objective(x)
        trace.append(obj)
        if callback is not None:
            callback(iterations, x, obj)

    if passive.any():
        # one step of iterative refinement on the final passive set
        x[passive] += backend.refine(passive, x)
        x[passive] = np.maximum(x[passive], 0.0)
    return x, iterations, trace


def solve_nnls(
    problem: NnlsProblem,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    x0=None,
    callback: Optional[Callable[[int, np.ndarray, float], None]] = None,
    method: str = "qr",
) -> NnlsSolution:
    """Solve ``min_{x >= 0} ||A^T x - b||`` by the Lawson-Hanson active-set method.

    Parameters
    ----------
    problem : NnlsProblem
    tol : float, optional
        Dual feasibility tolerance; defaults to ``1e-10 * (1 + ||b||_inf)``.
    max_iter : int, optional
        Cap on outer (variable-entering) iterations; defaults to ``3 * m``.
    x0 : array_like, optional
        Nonnegative warm start. Its support seeds the passive set.
    callback : callable, optional
        Called as ``callback(k, x, objective)`` after every outer iteration.
    method : {"qr", "gram"}

    Raises
    ------
    NnlsIterationLimit
        If the outer loop does not terminate within ``max_iter`` iterations.
    """
    if method == "gram":
        A, b = problem.A, problem.b
        sol = solve_nnls_gram(A @ A.T, A @ b, float(b @ b), tol=problem.default_tol() if tol is None else tol,
                              max_iter=max_iter, x0=x0, callback=callback)
        sol.kkt_violation = kkt_violation(problem, sol.x)
        sol.residual_norm = float(np.linalg.norm(problem.residual(sol.x)))
        return sol
    if method != "qr":
        raise ValueError(f"unknown method {method!r}")
    tol = problem.default_tol() if tol is None else float(tol)
    if tol <= 0:
        raise ValueError("tol must be > 0")
    max_iter = 3 * problem.m if max_iter is None else int(max_iter)
    x, iterations, trace = _active_set(_QRBackend(problem), problem.m, tol, max_iter, x0, callback)
    viol = kkt_violation(problem, x)
    if viol > tol:
        logger.debug("NNLS finished with KKT violation %.3g > tol %.3g", viol, tol)
    return NnlsSolution(
        x=x,
        residual_norm=float(np.linalg.norm(problem.residual(x))),
        iterations=iterations,
        kkt_violation=viol,
        objective_trace=trace,
    )


def solve_nnls_gram(
    gram,
    atb,
    btb: float = 0.0,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    x0=None,
    callback=None,
) -> NnlsSolution:
    """Same problem given only ``G = A A^T``, ``c = A b`` and ``||b||^2``.

    Without ``btb`` the reported residual norm and objective trace are offset
    by the constant ``||b||^2 / 2``.
    """
    G = np.asarray(gram, dtype=float)
    c = np.asarray(atb, dtype=float).reshape(-1)
    m = c.shape[0]
    if G.shape != (m, m):
        raise ValueError(f"gram has shape {G.shape}, expected {(m, m)}")
    tol = 1e-10 * (1.0 + float(np.max(np.abs(c)))) if tol is None else float(tol)
    if tol <= 0:
        raise ValueError("tol must be > 0")
    max_iter = 3 * m if max_iter is None else int(max_iter)
    backend = _GramBackend(G, c, float(btb))
    x, iterations, trace = _active_set(backend, m, tol, max_iter, x0, callback)
    viol = _kkt_from_gradient(x, -backend.dual(x))
    return NnlsSolution(
        x=x,
        residual_norm=float(np.sqrt(max(2.0 * backend.objective(x), 0.0))),
        iterations=iterations,
        kkt_violation=viol,
        objective_trace=trace,
    )
