"""Insertion step: maximize ``int_E p / Per(E)`` over unions of triangles.

The fractional problem is solved by the Dinkelbach-Newton iteration on the
value function ``G(lam) = min_E Per(E) - lam * int_E p``; every evaluation
of ``G`` is one s-t min-cut on the dual graph of the mesh.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .maxflow import FlowNetwork
from .mesh import Mesh
from .tvcalc import center, perimeter

__all__ = [
    "InsertionResult",
    "InsertionError",
    "Stagnated",
    "plambda_network",
    "solve_plambda",
    "dinkelbach",
    "is_zero",
]

logger = logging.getLogger(__name__)

EPS_ABS = 1e-12
EPS_REL = 1e-12


class InsertionError(RuntimeError):
    """The Dinkelbach iterates violated monotonicity (cut accuracy failure)."""


class Stagnated(RuntimeError):
    pass


def is_zero(G: float, per: float) -> bool:
    return abs(G) <= EPS_ABS + EPS_REL * (1.0 + per)


@dataclass
class InsertionResult:
    lambda_bar: float
    set: np.ndarray
    dinkelbach_iters: int
    history: list[tuple[float, float]] = field(default_factory=list)

    @property
    def certificate(self) -> bool:
        """True when no set beats ratio one, i.e. the iterate is optimal."""
        return self.set.size == 0


def plambda_network(mesh: Mesh, p: np.ndarray, lam: float) -> FlowNetwork:
    """(s,t)-graph whose min cut minimizes ``Per(E) - lam * int_E p``."""
    w = lam * np.asarray(p, dtype=float) * mesh.areas
    net = FlowNetwork(mesh.n_triangles)
    net.add_edge(mesh.interior_edges[:, 0], mesh.interior_edges[:, 1], mesh.interior_lengths)
    nodes = np.arange(mesh.n_triangles)
    net.add_tedge(nodes, np.maximum(0.0, -w), np.maximum(0.0, w))
    return net


def solve_plambda(mesh: Mesh, p: np.ndarray, lam: float, return_flow: bool = False):
    """Minimize ``j_lam(E) = Per(E) - lam * int_E p`` by one min cut.

    Returns ``(E, G)`` where ``E`` are the sink-side triangles and ``G`` is
    ``j_lam(E)`` evaluated directly on the returned set. With
    ``return_flow=True`` the max-flow value is appended.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    p = np.asarray(p, dtype=float)
    net = plambda_network(mesh, p, lam)
    cut = net.max_flow()
    E = cut.sink_side
    per = perimeter(mesh, E)
    G = per - lam * float(np.sum(p[E] * mesh.areas[E]))
    scale = 1.0 + per + float(np.sum(np.abs(lam * p * mesh.areas)))
    if G > 1e-12 * scale:
        raise InsertionError(f"min cut returned j_lambda = {G:.3e} > 0")
    if return_flow:
        return E, G, cut.flow
    return E, G


def dinkelbach(mesh: Mesh, p: np.ndarray, max_iter: int = 100) -> InsertionResult:
    """Dinkelbach-Newton iteration started at ``lam = 1``.

    Returns ``lambda_bar`` (the reciprocal of the maximal ratio, or 1 when
    the maximal ratio does not exceed one) and a maximizing set. An empty
    set signals that the current iterate is optimal.
    """
    p = center(mesh, p)
    pa = p * mesh.areas
    lam = 1.0
    E, G = solve_plambda(mesh, p, lam)
    history = [(lam, G)]
    if is_zero(G, perimeter(mesh, E)):
        return InsertionResult(1.0, np.empty(0, dtype=np.int64), 0, history)
    for it in range(1, max_iter + 1):
        mass = float(np.sum(pa[E]))
        if mass <= 0:
            raise InsertionError(f"negative mass {mass:.3e} on a set with G < 0")
        lam_next = perimeter(mesh, E) / mass
        if not lam_next < lam:
            raise InsertionError(f"lambda did not decrease: {lam!r} -> {lam_next!r}")
        E_next, G_next = solve_plambda(mesh, p, lam_next)
        history.append((lam_next, G_next))
        if is_zero(G_next, perimeter(mesh, E_next)):
            logger.debug("dinkelbach: lambda_bar=%.12g after %d steps", lam_next, it)
            return InsertionResult(lam_next, E, it, history)
        lam, E = lam_next, E_next
    raise Stagnated(f"Dinkelbach did not terminate in {max_iter} iterations")
