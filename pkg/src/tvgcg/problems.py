"""Observation data for the bundled experiment presets."""
from __future__ import annotations

import numpy as np

from .fem import FemSystem, solve_state
from .mesh import Mesh

__all__ = [
    "CASTLE",
    "TWO_SPHERES",
    "castle_observation",
    "two_spheres_control",
    "two_spheres_observation",
    "project_indicator",
]

CASTLE = {"alpha": 1e-4, "c_coeff": 0.0}
TWO_SPHERES = {
    "alpha": 1e-5,
    "c_coeff": 0.5,
    "disks": (((1 / 3, 1 / 3), np.sqrt(0.15), 1.0), ((-1 / 3, -1 / 3), np.sqrt(0.1), 2.0)),
    "offset": -1.0,
}


def _subtriangle_points(level: int) -> np.ndarray:
    """Barycentric centroids of the ``4**level`` congruent subtriangles."""
    m = 2**level
    pts = []
    for i in range(m):
        for j in range(m - i):
            pts.append(((i + 1 / 3) / m, (j + 1 / 3) / m))
            if i + j < m - 1:
                pts.append(((i + 2 / 3) / m, (j + 2 / 3) / m))
    b = np.array(pts)
    return np.column_stack([1.0 - b.sum(axis=1), b])


def project_indicator(mesh: Mesh, inside, level: int = 4) -> np.ndarray:
    """Cell averages of a pointwise function by subdivision quadrature.

    ``inside`` maps an (m, 2) array of points to values; the average over
    each triangle uses the centroids of ``4**level`` equal subtriangles.
    """
    lam = _subtriangle_points(level)
    corners = mesh.vertices[mesh.triangles]  # (nt, 3, 2)
    pts = np.einsum("qk,tkd->tqd", lam, corners)
    vals = np.asarray(inside(pts.reshape(-1, 2)), dtype=float).reshape(len(corners), -1)
    return vals.mean(axis=1)


def castle_observation(mesh: Mesh) -> np.ndarray:
    """P0 indicator of the square (-1/2, 1/2)^2 (exact for aligned meshes)."""
    return project_indicator(
        mesh, lambda x: (np.abs(x[:, 0]) < 0.5) & (np.abs(x[:, 1]) < 0.5)
    )


def two_spheres_control(mesh: Mesh, level: int = 4) -> np.ndarray:
    """``Pi_0 u_0`` for ``u_0 = 1_{D1} + 2 * 1_{D2} - 1``."""
    def u0(x):
        val = np.full(len(x), TWO_SPHERES["offset"])
        for center, radius, height in TWO_SPHERES["disks"]:
            val += height * (np.hypot(x[:, 0] - center[0], x[:, 1] - center[1]) < radius)
        return val

    return project_indicator(mesh, u0, level)


def two_spheres_observation(fem: FemSystem, level: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Returns ``(y_o, Pi_0 u_0)`` with ``y_o = K_h Pi_0 u_0`` (a P1 field)."""
    u0 = two_spheres_control(fem.mesh, level)
    return solve_state(fem, u0), u0
