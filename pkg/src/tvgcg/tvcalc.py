"""Total variation and perimeter of piecewise constant / affine fields."""
from __future__ import annotations

from typing import Callable

import numpy as np

from .fem import element_gradients
from .mesh import Mesh

__all__ = [
    "Anisotropy",
    "indicator",
    "as_triset",
    "tv_p0",
    "perimeter",
    "mean",
    "center",
    "tv_p1",
    "tv_phi_p0",
    "edge_normals",
]


def as_triset(mesh: Mesh, E) -> np.ndarray:
    """Validate and normalize a triangle set to a sorted unique index array."""
    E = np.unique(np.asarray(E, dtype=np.int64))
    if E.size and (E[0] < 0 or E[-1] >= mesh.n_triangles):
        raise IndexError("triangle index out of range")
    return E


def indicator(mesh: Mesh, E) -> np.ndarray:
    u = np.zeros(mesh.n_triangles)
    u[as_triset(mesh, E)] = 1.0
    return u


def tv_p0(mesh: Mesh, u: np.ndarray) -> float:
    """Sum over interior edges of ``|jump| * length``."""
    u = np.asarray(u, dtype=float)
    a, b = mesh.interior_edges[:, 0], mesh.interior_edges[:, 1]
    return float(np.sum(np.abs(u[a] - u[b]) * mesh.interior_lengths))


def perimeter(mesh: Mesh, E) -> float:
    """Relative perimeter of a union of triangles (boundary of the domain excluded)."""
    return tv_p0(mesh, indicator(mesh, E))


def mean(mesh: Mesh, u: np.ndarray) -> float:
    return float(np.sum(mesh.areas * u) / np.sum(mesh.areas))


def center(mesh: Mesh, u: np.ndarray) -> np.ndarray:
    return np.asarray(u, dtype=float) - mean(mesh, u)


def tv_p1(mesh: Mesh, y: np.ndarray) -> float:
    """``sum_T area(T) |grad y|_T|`` for a continuous piecewise affine field."""
    y = np.asarray(y, dtype=float)
    g = element_gradients(mesh)
    grad = np.einsum("tik,ti->tk", g, y[mesh.triangles])
    return float(np.sum(mesh.areas * np.linalg.norm(grad, axis=1)))


def edge_normals(mesh: Mesh) -> np.ndarray:
    """Unit normals of the interior edges (orientation arbitrary)."""
    v = mesh.vertices
    d = v[mesh.interior_edge_vertices[:, 1]] - v[mesh.interior_edge_vertices[:, 0]]
    d /= np.linalg.norm(d, axis=1)[:, None]
    return np.column_stack([d[:, 1], -d[:, 0]])


class Anisotropy:
    """Even, positive surface-tension density ``phi`` on unit directions.

    Parameters
    ----------
    phi : callable
        Maps an array of unit vectors, shape (m, 2), to weights, shape (m,).
    symmetry : str
        Free-form tag of the symmetry group (informational).
    """

    def __init__(self, phi: Callable[[np.ndarray], np.ndarray], symmetry: str = ""):
        self.phi = phi
        self.symmetry = symmetry
        theta = np.linspace(0.0, 2 * np.pi, 97)
        nu = np.column_stack([np.cos(theta), np.sin(theta)])
        w, w_neg = np.asarray(phi(nu)), np.asarray(phi(-nu))
        if np.any(w <= 0):
            raise ValueError("anisotropy must be positive")
        if not np.allclose(w, w_neg, rtol=1e-12, atol=0):
            raise ValueError("anisotropy must be even: phi(nu) == phi(-nu)")

    def __call__(self, nu: np.ndarray) -> np.ndarray:
        return np.asarray(self.phi(np.atleast_2d(nu)), dtype=float)

    @classmethod
    def isotropic(cls) -> "Anisotropy":
        return cls(lambda nu: np.ones(len(nu)), symmetry="O(2)")


def tv_phi_p0(mesh: Mesh, u: np.ndarray, phi: Anisotropy) -> float:
    """Anisotropic TV: jumps weighted by ``phi`` of the edge normal."""
    u = np.asarray(u, dtype=float)
    a, b = mesh.interior_edges[:, 0], mesh.interior_edges[:, 1]
    w = phi(edge_normals(mesh))
    return float(np.sum(np.abs(u[a] - u[b]) * mesh.interior_lengths * w))
