"""Fully-corrective conditional gradient loop with Dinkelbach insertion.

The problem solved is, for a P0 control ``u`` on a mesh,

    min_u  (1 / (2 alpha)) ||K u - y_o||^2 + TV(u)

which is the reported energy ``J = 0.5 ||K u - y_o||^2 + alpha TV(u)``
divided by ``alpha``. Iterates are ``u = sum_i gamma_i 1_{E_i} / Per(E_i) + c``.
"""
from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .fem import FemSystem, project_p0, solve_adjoint, solve_state
from .insertion import Stagnated as InsertionStagnated
from .insertion import dinkelbach
from .subproblem import CoefProblem, CoefSolution, solve_ssn
from .tvcalc import indicator, mean, perimeter, tv_p0

__all__ = [
    "Atom",
    "Status",
    "GcgSolver",
    "GcgResult",
    "LOG_COLUMNS",
    "MaxIterExceeded",
    "Stagnated",
    "solve",
]

logger = logging.getLogger(__name__)

LOG_COLUMNS = (
    "k", "J", "misfit", "tv", "sum_gamma", "zeta", "lambda_bar",
    "n_atoms", "dinkelbach_iters", "ssn_iters", "wall_ms",
)


class Status(enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    STAGNATED = "stagnated"


class MaxIterExceeded(RuntimeError):
    def __init__(self, result):
        super().__init__(f"no convergence within {len(result.log)} iterations")
        self.result = result


class Stagnated(InsertionStagnated):
    def __init__(self, result):
        super().__init__(result.message or "outer iteration stagnated")
        self.result = result


@dataclass
class Atom:
    """Normalized indicator ``1_E / Per(E)`` with its cached state."""

    set: np.ndarray
    perimeter: float
    state: np.ndarray

    def control(self, n_triangles: int) -> np.ndarray:
        u = np.zeros(n_triangles)
        u[self.set] = 1.0 / self.perimeter
        return u


@dataclass
class GcgResult:
    status: Status
    control: np.ndarray
    state: np.ndarray
    dual: np.ndarray
    atoms: list[Atom]
    gamma: np.ndarray
    c: float
    log: list[dict]
    n_pde_solves: int
    lambda_bar: float
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def raise_for_status(self) -> "GcgResult":
        """Raise :class:`MaxIterExceeded` or :class:`Stagnated` unless converged."""
        if self.status is Status.MAX_ITER:
            raise MaxIterExceeded(self)
        if self.status is Status.STAGNATED:
            raise Stagnated(self)
        return self


@dataclass
class _Iterate:
    atoms: list[Atom]
    prob: CoefProblem
    sol: CoefSolution


@dataclass
class GcgSolver:
    """Dinkelbach-FC-GCG on an assembled FEM system.

    Parameters
    ----------
    fem : FemSystem
    y_obs : ndarray
        Observation, either P0 (one value per triangle) or P1 (per vertex).
    alpha : float
        Regularization weight of the TV term in the reported energy.
    zeta_tol, ssn_tol : float
        Stopping tolerance on the certificate and KKT tolerance of the
        coefficient solver.
    max_iter : int
        Maximal number of insertions.
    """

    fem: FemSystem
    y_obs: np.ndarray
    alpha: float
    zeta_tol: float = 1e-10
    ssn_tol: float = 1e-14
    max_iter: int = 500
    clock: object = field(default=time.perf_counter, repr=False)

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        mesh = self.fem.mesh
        y = np.asarray(self.y_obs, dtype=float)
        if y.shape == (mesh.n_triangles,):
            self.obs_load = self.fem.load_p0(y)
            self.yy = float(np.sum(mesh.areas * y * y))
        elif y.shape == (mesh.n_vertices,):
            self.obs_load = self.fem.load_p1(y)
            self.yy = float(y @ (self.fem.M @ y))
        else:
            raise ValueError(f"observation of shape {y.shape} matches neither P0 nor P1")
        self.y_obs = y

    # -- building blocks -------------------------------------------------

    def _gram_row(self, state, states):
        Ms = self.fem.M @ state
        return np.array([s @ Ms for s in states]), float(state @ self.obs_load)

    def initialize(self) -> _Iterate:
        """Constant control minimizing the misfit (no atoms)."""
        self.k_one = solve_state(self.fem, np.ones(self.fem.mesh.n_triangles))
        q, b = self._gram_row(self.k_one, [self.k_one])
        prob = CoefProblem(q[None, :], [b], self.yy, self.alpha)
        sol = solve_ssn(prob, tol=self.ssn_tol)
        return _Iterate([], prob, sol)

    def state_of(self, it: _Iterate) -> np.ndarray:
        y = it.sol.c * self.k_one
        for g, a in zip(it.sol.gamma, it.atoms):
            y = y + g * a.state
        return y

    def control_of(self, it: _Iterate) -> np.ndarray:
        n = self.fem.mesh.n_triangles
        u = np.full(n, it.sol.c)
        for g, a in zip(it.sol.gamma, it.atoms):
            u[a.set] += g / a.perimeter
        return u

    def dual_variable(self, y: np.ndarray) -> tuple[np.ndarray, float]:
        """``p = Pi_0(z) / alpha`` with ``A z = M (y_o - y)``, centered.

        Returns the centered dual and its mean before centering.
        """
        z = solve_adjoint(self.fem, load=self.obs_load - self.fem.M @ y)
        p = project_p0(self.fem.mesh, z) / self.alpha
        m = mean(self.fem.mesh, p)
        return p - m, m

    def misfit(self, it: _Iterate) -> float:
        """``0.5 ||y - y_o||^2`` via the Gram representation."""
        w = it.sol.w
        val = w @ it.prob.Q @ w - 2.0 * it.prob.b @ w + self.yy
        return 0.5 * max(val, 0.0)

    def insert(self, it: _Iterate, E: np.ndarray, tol: float) -> tuple[_Iterate, int]:
        """Add ``1_E / Per(E)``, re-optimize all coefficients and prune."""
        mesh = self.fem.mesh
        per = perimeter(mesh, E)
        state = solve_state(self.fem, indicator(mesh, E) / per)
        atoms = it.atoms + [Atom(E, per, state)]
        q, b = self._gram_row(state, [a.state for a in it.atoms] + [self.k_one, state])
        prob = it.prob.with_atom(q, b)
        warm = np.r_[it.sol.gamma, 0.0, it.sol.c]
        sol = solve_ssn(prob, warm=warm, tol=tol)
        keep = sol.gamma > 0
        if not np.all(keep):
            atoms = [a for a, k in zip(atoms, keep) if k]
            prob = prob.without(keep)
            sol = CoefSolution(sol.gamma[keep], sol.c, sol.objective, sol.kkt_residual, sol.iterations)
        return _Iterate(atoms, prob, sol), sol.iterations

    # -- main loop -------------------------------------------------------

    def run(self) -> GcgResult:
        mesh = self.fem.mesh
        t0 = self.clock()
        it = self.initialize()
        log: list[dict] = []
        status, message = Status.MAX_ITER, ""
        retried = False
        lambda_bar = float("nan")
        k = 0
        while True:
            u = self.control_of(it)
            p, _ = self.dual_variable(self.state_of(it))
            try:
                ins = dinkelbach(mesh, p)
            except InsertionStagnated as exc:
                status, message = Status.STAGNATED, f"iteration {k}: {exc}"
                break
            lambda_bar = ins.lambda_bar
            M_k = it.sol.objective
            zeta = 0.0 if ins.certificate else M_k * (1.0 / ins.lambda_bar - 1.0)
            misfit = self.misfit(it)
            tv = tv_p0(mesh, u)
            row = {
                "k": k,
                "J": misfit + self.alpha * tv,
                "misfit": misfit,
                "tv": tv,
                "sum_gamma": float(it.sol.gamma.sum()),
                "zeta": max(zeta, 0.0),
                "lambda_bar": ins.lambda_bar,
                "n_atoms": len(it.atoms),
                "dinkelbach_iters": ins.dinkelbach_iters,
                "ssn_iters": 0,
                "wall_ms": 0.0,
                "zeta_raw": zeta,
                "M": M_k,
                "J_internal": misfit / self.alpha + tv,
            }
            if ins.certificate or zeta <= self.zeta_tol:
                status = Status.CONVERGED
            elif any(np.array_equal(ins.set, a.set) for a in it.atoms):
                if retried:
                    status = Status.STAGNATED
                    message = f"iteration {k}: inserted set duplicates an active atom (zeta={zeta:.3e})"
                else:
                    logger.info("iteration %d: duplicate atom, re-solving coefficients", k)
                    retried = True
                    sol = solve_ssn(it.prob, tol=self.ssn_tol * 1e-2)
                    it = _Iterate(it.atoms, it.prob, sol)
                    continue
            else:
                retried = False
                it, row["ssn_iters"] = self.insert(it, ins.set, self.ssn_tol)
            row["wall_ms"] = 1e3 * (self.clock() - t0)
            log.append(row)
            logger.debug("k=%d J=%.10g zeta=%.3e atoms=%d", k, row["J"], zeta, len(it.atoms))
            if status is not Status.MAX_ITER:
                break
            k += 1
            if k >= self.max_iter:
                # the final insertion has been made but not certified
                p, _ = self.dual_variable(self.state_of(it))
                break
        return GcgResult(
            status=status,
            control=self.control_of(it),
            state=self.state_of(it),
            dual=p,
            atoms=it.atoms,
            gamma=it.sol.gamma.copy(),
            c=it.sol.c,
            log=log,
            n_pde_solves=self.fem.n_solves,
            lambda_bar=lambda_bar,
            message=message,
        )


def solve(fem: FemSystem, y_obs: np.ndarray, alpha: float, **kwargs) -> GcgResult:
    return GcgSolver(fem, y_obs, alpha, **kwargs).run()
