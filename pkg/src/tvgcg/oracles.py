"""Exhaustive reference solvers for tiny instances.

These enumerate every subset of triangles (or every s-t partition) and are
only usable for at most ~20 nodes. They share no code with the graph-cut
path and serve as independent checks for it.
"""
from __future__ import annotations

import numpy as np

from .maxflow import FlowNetwork
from .mesh import Mesh

__all__ = [
    "subset_bits",
    "subset_perimeters",
    "brute_force_min_cut",
    "brute_force_plambda",
    "brute_force_ratio",
    "random_dual",
]

MAX_NODES = 20


def subset_bits(n: int) -> np.ndarray:
    """Boolean matrix of shape (2**n, n); row ``k`` is the binary expansion of ``k``."""
    if n > MAX_NODES:
        raise ValueError(f"refusing to enumerate 2**{n} subsets")
    k = np.arange(2**n, dtype=np.int64)[:, None]
    return ((k >> np.arange(n)) & 1).astype(bool)


def subset_perimeters(mesh: Mesh, bits: np.ndarray | None = None) -> np.ndarray:
    """Perimeter of every subset by a direct loop over adjacent triangle pairs."""
    if bits is None:
        bits = subset_bits(mesh.n_triangles)
    per = np.zeros(len(bits))
    # independent edge walk: test each pair of triangles for a shared side
    tri = [set(t) for t in mesh.triangles.tolist()]
    V = mesh.vertices
    for i in range(len(tri)):
        for j in range(i + 1, len(tri)):
            common = tri[i] & tri[j]
            if len(common) == 2:
                a, b = sorted(common)
                length = float(np.hypot(*(V[a] - V[b])))
                per += length * (bits[:, i] != bits[:, j])
    return per


def brute_force_plambda(mesh: Mesh, p: np.ndarray, lam: float, per=None, bits=None):
    """Minimum of ``Per(E) - lam * int_E p`` over all subsets; returns (value, mask)."""
    if bits is None:
        bits = subset_bits(mesh.n_triangles)
    if per is None:
        per = subset_perimeters(mesh, bits)
    mass = bits.astype(float) @ (np.asarray(p) * mesh.areas)
    j = per - lam * mass
    k = int(np.argmin(j))
    return float(j[k]), bits[k]


def brute_force_ratio(mesh: Mesh, p: np.ndarray, per=None, bits=None):
    """Maximum of ``int_E p / Per(E)`` over subsets with positive perimeter."""
    if bits is None:
        bits = subset_bits(mesh.n_triangles)
    if per is None:
        per = subset_perimeters(mesh, bits)
    mass = bits.astype(float) @ (np.asarray(p) * mesh.areas)
    ok = per > 0
    ratio = np.full(len(per), -np.inf)
    ratio[ok] = mass[ok] / per[ok]
    k = int(np.argmax(ratio))
    return float(ratio[k]), bits[k]


def brute_force_min_cut(net: FlowNetwork) -> float:
    """Minimum s-t cut value over all 2**n partitions of the interior nodes."""
    n = net.n_nodes
    tail, head, cap = net.arcs()
    bits = subset_bits(n)
    # column n is the source (never on the sink side), n+1 the sink (always)
    full = np.concatenate([bits, np.zeros((len(bits), 1), bool), np.ones((len(bits), 1), bool)], axis=1)
    crossing = ~full[:, tail] & full[:, head]
    return float((crossing * cap).sum(axis=1).min())


def random_dual(mesh: Mesh, rng: np.random.Generator, scale: float = 40.0) -> np.ndarray:
    """Area-weighted mean-zero P0 field with i.i.d. normal values times ``scale``."""
    p = scale * rng.standard_normal(mesh.n_triangles)
    p -= np.sum(p * mesh.areas) / mesh.areas.sum()
    return p
