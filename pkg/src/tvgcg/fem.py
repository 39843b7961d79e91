"""Linear finite elements for ``-div(grad y) + c y = u`` with zero Dirichlet data.

Controls live in P0 (one value per triangle), states in P1 (one value per
vertex). Boundary degrees of freedom are removed from the system, so the
reduced matrix is symmetric positive definite.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh

__all__ = [
    "FemSystem",
    "SolverError",
    "assemble",
    "element_gradients",
    "solve_state",
    "solve_adjoint",
    "project_p0",
    "inner_l2",
    "pcg",
]


class SolverError(RuntimeError):
    """Conjugate gradients failed to reach the requested residual."""


def element_gradients(mesh: Mesh) -> np.ndarray:
    """Gradients of the three barycentric functions, shape (n_tri, 3, 2)."""
    p = mesh.vertices[mesh.triangles]
    # gradient of lambda_k is rot90(edge opposite k) / (2 area)
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    g = np.stack([-e[..., 1], e[..., 0]], axis=-1)
    return g / (2.0 * mesh.areas)[:, None, None]


def pcg(A, b, tol=1e-12, maxiter=None, counter=None):
    """Jacobi-preconditioned conjugate gradients.

    Stops once ``||b - A x|| <= tol * ||b||``. Raises :class:`SolverError`
    if that does not happen within ``maxiter`` iterations (default
    ``50 * sqrt(n)``, at least 100).
    """
    n = A.shape[0]
    if maxiter is None:
        maxiter = max(100, int(50 * np.sqrt(max(n, 1))))
    x = np.zeros(n)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return x
    dinv = 1.0 / A.diagonal()
    r = b.copy()
    z = dinv * r
    d = z.copy()
    rz = r @ z
    target = tol * bnorm
    for it in range(maxiter):
        Ad = A @ d
        step = rz / (d @ Ad)
        x += step * d
        r -= step * Ad
        if np.linalg.norm(r) <= target:
            # recompute the true residual to guard against drift
            r = b - A @ x
            if np.linalg.norm(r) <= target:
                return x
        z = dinv * r
        rz_new = r @ z
        d = z + (rz_new / rz) * d
        rz = rz_new
    res = np.linalg.norm(b - A @ x) / bnorm
    raise SolverError(f"CG did not converge in {maxiter} iterations (relative residual {res:.3e})")


@dataclass(eq=False)
class FemSystem:
    """Assembled P1 system on a mesh.

    Attributes
    ----------
    A : csr_matrix
        Stiffness plus ``c`` times mass, restricted to interior vertices.
    M : csr_matrix
        Full P1 mass matrix (all vertices).
    B : csr_matrix
        P0-to-P1 load map, ``B[v, t] = area(t) / 3`` for vertices ``v`` of ``t``.
    K_full : csr_matrix
        Full stiffness matrix before Dirichlet elimination.
    interior : ndarray
        Indices of the free (interior) vertices.
    """

    mesh: Mesh
    c: float
    A: sp.csr_matrix
    M: sp.csr_matrix
    B: sp.csr_matrix
    K_full: sp.csr_matrix
    interior: np.ndarray
    tol: float = 1e-12
    n_solves: int = field(default=0)

    def solve(self, rhs_full: np.ndarray) -> np.ndarray:
        """Solve with a full-length load vector; return a full P1 vector."""
        self.n_solves += 1
        y = np.zeros(self.mesh.n_vertices)
        y[self.interior] = pcg(self.A, rhs_full[self.interior], tol=self.tol)
        return y

    def load_p0(self, u: np.ndarray) -> np.ndarray:
        """Load vector ``(int u phi_v)_v`` of a P0 field."""
        return self.B @ u

    def load_p1(self, y: np.ndarray) -> np.ndarray:
        """Load vector ``(int y phi_v)_v`` of a P1 field."""
        return self.M @ y


def assemble(mesh: Mesh, c: float = 0.0, tol: float = 1e-12) -> FemSystem:
    """Assemble stiffness, mass and load maps on ``mesh`` with reaction ``c``."""
    if c < 0:
        raise ValueError(f"reaction coefficient must be nonnegative, got {c}")
    nv, nt = mesh.n_vertices, mesh.n_triangles
    tri = mesh.triangles
    area = mesh.areas
    g = element_gradients(mesh)
    ke = area[:, None, None] * np.einsum("tik,tjk->tij", g, g)
    me = (area / 12.0)[:, None, None] * (np.ones((3, 3)) + np.eye(3))[None]

    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    K = sp.csr_matrix((ke.ravel(), (rows, cols)), shape=(nv, nv))
    M = sp.csr_matrix((me.ravel(), (rows, cols)), shape=(nv, nv))
    K.sum_duplicates()
    M.sum_duplicates()

    B = sp.csr_matrix(
        (np.repeat(area / 3.0, 3), (tri.ravel(), np.repeat(np.arange(nt), 3))),
        shape=(nv, nt),
    )

    free = np.ones(nv, dtype=bool)
    free[mesh.boundary_vertices] = False
    interior = np.flatnonzero(free)
    A = (K + c * M)[interior][:, interior].tocsr()
    A.sort_indices()
    return FemSystem(mesh=mesh, c=float(c), A=A, M=M, B=B, K_full=K, interior=interior, tol=tol)


def solve_state(sys: FemSystem, u: np.ndarray) -> np.ndarray:
    """Discrete control-to-state map ``K_h``: P0 control -> P1 state."""
    u = np.asarray(u, dtype=float)
    if u.shape != (sys.mesh.n_triangles,):
        raise ValueError(f"P0 field must have shape ({sys.mesh.n_triangles},), got {u.shape}")
    return sys.solve(sys.load_p0(u))


def solve_adjoint(sys: FemSystem, r: np.ndarray | None = None, *, load: np.ndarray | None = None) -> np.ndarray:
    """Adjoint solve ``A z = M r`` on interior vertices.

    Pass either a P1 residual ``r`` or a precomputed full-length ``load``
    vector (used when the residual mixes P0 and P1 data).
    """
    if (r is None) == (load is None):
        raise ValueError("pass exactly one of r or load")
    if load is None:
        r = np.asarray(r, dtype=float)
        if r.shape != (sys.mesh.n_vertices,):
            raise ValueError(f"P1 field must have shape ({sys.mesh.n_vertices},), got {r.shape}")
        load = sys.load_p1(r)
    return sys.solve(np.asarray(load, dtype=float))


def project_p0(mesh: Mesh, y: np.ndarray) -> np.ndarray:
    """L2-orthogonal projection P1 -> P0: the mean of the three vertex values."""
    return np.asarray(y, dtype=float)[mesh.triangles].mean(axis=1)


def inner_l2(mesh: Mesh, a: np.ndarray, b: np.ndarray, M: sp.spmatrix | None = None) -> float:
    """Exact L2 inner product of two P0 or P1 fields (mixed pairs allowed).

    The field class is inferred from the length. For P1 x P1 the mass
    matrix is assembled on the fly unless ``M`` is given.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    nt, nv = mesh.n_triangles, mesh.n_vertices
    kinds = []
    for f in (a, b):
        if f.shape == (nt,):
            kinds.append(0)
        elif f.shape == (nv,):
            kinds.append(1)
        else:
            raise ValueError(f"field of shape {f.shape} does not match the mesh")
    if kinds == [0, 0]:
        return float(np.sum(mesh.areas * a * b))
    if kinds == [0, 1]:
        return float(np.sum(mesh.areas * a * project_p0(mesh, b)))
    if kinds == [1, 0]:
        return float(np.sum(mesh.areas * b * project_p0(mesh, a)))
    if M is None:
        M = assemble(mesh).M
    return float(a @ (M @ b))
