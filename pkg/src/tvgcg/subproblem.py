"""Coefficient subproblem of the fully-corrective step.

Minimize over ``w = (gamma, c)`` with ``gamma >= 0`` and ``c`` free::

    f(w) = (wᵀQw - 2 bᵀw + yy) / (2 alpha) + sum(gamma)

where ``Q`` is the Gram matrix of the cached atom states followed by the
state of the constant control. The solver is a semismooth Newton method on
Robinson's normal map, with a projected-gradient fallback.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

__all__ = ["CoefProblem", "CoefSolution", "NonConvergent", "solve_ssn", "kkt_residual"]

logger = logging.getLogger(__name__)


class NonConvergent(RuntimeError):
    pass


@dataclass
class CoefProblem:
    """Quadratic coefficient problem; the last column is the free constant."""

    Q: np.ndarray
    b: np.ndarray
    yy: float
    alpha: float

    def __post_init__(self):
        self.Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float))
        n = self.Q.shape[0]
        if self.Q.shape != (n, n) or self.b.shape != (n,) or n < 1:
            raise ValueError("Q must be square and match b; at least the constant column is required")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    @property
    def n_atoms(self) -> int:
        return self.Q.shape[0] - 1

    @property
    def H(self) -> np.ndarray:
        return self.Q / self.alpha

    @property
    def q(self) -> np.ndarray:
        q = -self.b / self.alpha
        q[:-1] += 1.0
        return q

    def objective(self, w: np.ndarray) -> float:
        w = np.asarray(w, dtype=float)
        quad = w @ self.Q @ w - 2.0 * self.b @ w + self.yy
        return float(quad / (2.0 * self.alpha) + w[:-1].sum())

    def gradient(self, w: np.ndarray) -> np.ndarray:
        return self.H @ w + self.q

    def with_atom(self, q_new: np.ndarray, b_new: float) -> "CoefProblem":
        """Insert one atom column before the constant column.

        ``q_new`` holds the inner products of the new state with the existing
        atom states, the constant state, and itself (in that order).
        """
        n = self.Q.shape[0]
        Q = np.empty((n + 1, n + 1))
        idx = np.r_[np.arange(n - 1), n]
        Q[np.ix_(idx, idx)] = self.Q
        Q[n - 1, idx] = q_new[:n]
        Q[idx, n - 1] = q_new[:n]
        Q[n - 1, n - 1] = q_new[n]
        b = np.r_[self.b[:-1], b_new, self.b[-1]]
        return CoefProblem(Q, b, self.yy, self.alpha)

    def without(self, keep: np.ndarray) -> "CoefProblem":
        """Keep the atoms flagged in ``keep`` (the constant is always kept)."""
        idx = np.r_[np.flatnonzero(keep), self.Q.shape[0] - 1]
        return CoefProblem(self.Q[np.ix_(idx, idx)], self.b[idx], self.yy, self.alpha)


@dataclass
class CoefSolution:
    gamma: np.ndarray
    c: float
    objective: float
    kkt_residual: float
    iterations: int

    @property
    def w(self) -> np.ndarray:
        return np.r_[self.gamma, self.c]


def kkt_residual(prob: CoefProblem, w: np.ndarray) -> float:
    g = prob.gradient(w)
    gam = w[:-1]
    comp = np.abs(np.minimum(gam, g[:-1])) if gam.size else np.zeros(0)
    return float(max(abs(g[-1]), comp.max(initial=0.0), (-gam).max(initial=0.0)))


def _solve_block(H, rhs):
    try:
        c, low = la.cho_factor(H, check_finite=False)
        x = la.cho_solve((c, low), rhs, check_finite=False)
        if np.all(np.isfinite(x)):
            return x
    except la.LinAlgError:
        pass
    return la.lstsq(H, rhs, check_finite=False)[0]


def _newton_on_support(prob, free, w, refine=3):
    """Solve the stationarity equations restricted to ``free``, with refinement."""
    H, q = prob.H, prob.q
    Hf = H[np.ix_(free, free)]
    w = w.copy()
    w[~free] = 0.0
    w[free] = _solve_block(Hf, -q[free])
    for _ in range(refine):
        r = H[free] @ w + q[free]
        if not np.any(r):
            break
        w[free] -= _solve_block(Hf, r)
    return w


def solve_ssn(prob: CoefProblem, warm: CoefSolution | np.ndarray | None = None,
              tol: float = 1e-14, max_iter: int = 100) -> CoefSolution:
    """Semismooth Newton on the normal map ``F(z) = H P(z) + q + z - P(z)``.

    ``P`` clips the atom coordinates at zero and leaves the constant free.
    A full Newton step amounts to solving the stationarity system on the
    current support ``{z_i > 0}``; the multiplier estimate of the clipped
    coordinates is their gradient. Inactive weights are hard zeroed.
    """
    n = prob.Q.shape[0]
    if warm is None:
        z = np.zeros(n)
        z[:-1] = 1.0
    else:
        w0 = warm.w if isinstance(warm, CoefSolution) else np.asarray(warm, dtype=float)
        z = np.zeros(n)
        z[: len(w0) - 1] = w0[:-1]
        z[-1] = w0[-1]
        # coordinates warm-started at zero are reactivated if their gradient is negative
        g0 = prob.gradient(np.r_[np.maximum(z[:-1], 0.0), z[-1]])
        zero = z[:-1] <= 0
        z[:-1][zero] = -g0[:-1][zero]

    seen: set[tuple] = set()
    w = np.maximum(z, 0.0)
    w[-1] = z[-1]
    for it in range(max_iter + 1):
        free = np.r_[z[:-1] > 0, True]
        support = tuple(np.flatnonzero(free[:-1]))
        w = _newton_on_support(prob, free, w)
        res = kkt_residual(prob, w)
        if res <= tol or _at_rounding_floor(prob, w, res):
            return CoefSolution(w[:-1].copy(), float(w[-1]), prob.objective(w), res, it)
        if support in seen:
            break  # the support cycles: let the globalized method take over
        seen.add(support)
        g = prob.gradient(w)
        z = np.where(free, w, -g)
    logger.debug("ssn: switching to projected gradient (residual %.3e)", kkt_residual(prob, w))
    return _projected_gradient(prob, np.r_[np.maximum(w[:-1], 0.0), w[-1]], tol)


def _at_rounding_floor(prob, w, res):
    """True when the residual is at the level of floating-point cancellation."""
    g_terms = np.abs(prob.H) @ np.abs(w) + np.abs(prob.q)
    return res <= 64 * np.finfo(float).eps * float(g_terms.max(initial=1.0))


def _projected_gradient(prob, w, tol, max_iter=20000):
    H = prob.H
    L = float(np.linalg.eigvalsh(H).max()) if H.size else 1.0
    f = prob.objective(w)
    for it in range(max_iter):
        g = prob.gradient(w)
        step = 1.0 / max(L, 1e-300)
        while True:
            wn = w - step * g
            wn[:-1] = np.maximum(wn[:-1], 0.0)
            fn = prob.objective(wn)
            if fn <= f + g @ (wn - w) + 0.5 / step * np.sum((wn - w) ** 2) + 1e-15 * abs(f):
                break
            step *= 0.5
        w, f = wn, fn
        # polish on the detected support
        free = np.r_[w[:-1] > 0, True]
        cand = _newton_on_support(prob, free, w)
        if np.all(cand[:-1] >= 0):
            res = kkt_residual(prob, cand)
            if res <= tol or _at_rounding_floor(prob, cand, res):
                return CoefSolution(cand[:-1].copy(), float(cand[-1]), prob.objective(cand), res, it + 1)
    raise NonConvergent(f"coefficient subproblem did not reach KKT tolerance {tol:g}")
