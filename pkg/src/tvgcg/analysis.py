"""Mesh-induced anisotropy of the double-diagonal triangulation.

Discrete geodesics between ``(0, 0)`` and ``(1, sigma/tau)`` along mesh edges,
the octagonal anisotropy they induce, and the two-tent P1 total variation
check on an equilateral patch.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .mesh import Mesh, MeshKind, MeshSpec, build_double_diagonal, mesh_from_arrays
from .tvcalc import tv_p1

__all__ = [
    "GeodesicProblem",
    "GeodesicResult",
    "octagon_phi",
    "octagon_anisotropy",
    "octagon_gauge",
    "geodesic_length_formula",
    "discrete_geodesic",
    "canonical_geodesic",
    "geodesic_direction_check",
    "anisotropy_scan",
    "SCAN_COLUMNS",
    "tent_ball_tv",
    "tent_patch",
    "tent_patch_tv",
    "tent_patch_tv_closed_form",
]

SQRT2 = math.sqrt(2.0)
NU_DIAG = np.array([1.0, 1.0]) / SQRT2
NU_AXIS = np.array([1.0, 0.0])
SCAN_COLUMNS = ("theta", "sigma", "tau", "length", "ratio", "phi", "abs_error")


# -- octagon -------------------------------------------------------------

def octagon_phi(direction) -> np.ndarray | float:
    """Octagonal anisotropy, positively 1-homogeneous.

    The unit level set is the regular octagon with a vertex at ``(1, 0)``;
    on ``[0, pi/4]`` it reads ``cos t + (sqrt(2) - 1) sin t``, extended by
    the 8-fold dihedral symmetry.

    Parameters
    ----------
    direction : array_like, shape (2,) or (m, 2)
        Nonzero vectors.
    """
    d = np.asarray(direction, dtype=float)
    single = d.ndim == 1
    d = np.atleast_2d(d)
    r = np.hypot(d[:, 0], d[:, 1])
    if np.any(r == 0) or not np.all(np.isfinite(r)):
        raise ValueError("octagon_phi needs nonzero finite directions")
    t = np.mod(np.arctan2(d[:, 1], d[:, 0]), np.pi / 2)
    t = np.where(t > np.pi / 4, np.pi / 2 - t, t)
    val = r * (np.cos(t) + (SQRT2 - 1.0) * np.sin(t))
    return float(val[0]) if single else val


def octagon_gauge(direction) -> float:
    """Gauge of the regular octagon with vertices ``(cos k pi/4, sin k pi/4)``.

    Computed from the polygon's facets: ``max_k <x, n_k> / r`` over the
    outer facet normals ``n_k`` with inradius ``r = cos(pi/8)``.
    """
    x = np.asarray(direction, dtype=float)
    ang = (np.arange(8) + 0.5) * np.pi / 4
    normals = np.column_stack([np.cos(ang), np.sin(ang)])
    return float(np.max(normals @ x) / math.cos(math.pi / 8))


def octagon_anisotropy():
    from .tvcalc import Anisotropy

    return Anisotropy(octagon_phi, symmetry="dihedral-8")


# -- geodesics -----------------------------------------------------------

@dataclass(frozen=True)
class GeodesicProblem:
    """Endpoints ``(0, 0)`` and ``(1, sigma/tau)`` on an ``n x n`` grid of ``[0, 1]^2``."""

    sigma: int
    tau: int
    n: int

    def __post_init__(self):
        s, t, n = self.sigma, self.tau, self.n
        if not (isinstance(s, (int, np.integer)) and isinstance(t, (int, np.integer))):
            raise ValueError("sigma and tau must be integers")
        if t < 1 or not 0 <= s <= t:
            raise ValueError("need 0 <= sigma <= tau and tau >= 1")
        if math.gcd(s, t) != 1:
            raise ValueError(f"sigma={s} and tau={t} are not coprime")
        if n < 1 or n % t:
            raise ValueError(f"n={n} must be a positive multiple of tau={t}")

    @property
    def slope(self) -> Fraction:
        return Fraction(self.sigma, self.tau)

    def mesh(self) -> Mesh:
        return build_double_diagonal(MeshSpec(MeshKind.DOUBLE_DIAGONAL, n=self.n, domain=(0.0, 1.0, 0.0, 1.0)))


@dataclass
class GeodesicResult:
    length: float
    path: list[int]
    points: np.ndarray


def geodesic_length_formula(sigma: int, tau: int) -> float:
    return 1.0 + (SQRT2 - 1.0) * sigma / tau


def _grid_index(n):
    """Maps (i, j) corner indices and (i, j) cell-center indices to vertex ids."""
    def corner(i, j):
        return j * (n + 1) + i

    def center(i, j):
        return (n + 1) ** 2 + j * n + i

    return corner, center


def _forbidden(prob: GeodesicProblem) -> set[int]:
    """Mesh nodes on the excluded boundary pieces.

    Excluded are the bottom side without the origin and the right side
    strictly between heights 0 and sigma/tau; every boundary edge inside
    them has such a node as an endpoint. For sigma = 0 the excluded set
    would contain the endpoint itself; then nothing is excluded.
    """
    n = prob.n
    corner, _ = _grid_index(n)
    k = n * prob.sigma // prob.tau  # grid height of the endpoint
    bad_vertices = set()
    if prob.sigma > 0:
        bad_vertices.update(corner(i, 0) for i in range(1, n + 1))
        bad_vertices.update(corner(n, j) for j in range(1, k))
    return bad_vertices


def _edge_graph(mesh: Mesh):
    tri = mesh.triangles
    e = np.sort(np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1)
    e = np.unique(e, axis=0)
    length = np.linalg.norm(mesh.vertices[e[:, 0]] - mesh.vertices[e[:, 1]], axis=1)
    adj: list[list[tuple[int, float]]] = [[] for _ in range(mesh.n_vertices)]
    for (a, b), w in zip(e.tolist(), length.tolist()):
        adj[a].append((b, w))
        adj[b].append((a, w))
    for nb in adj:
        nb.sort()
    return adj


def discrete_geodesic(prob: GeodesicProblem, mesh: Mesh | None = None) -> GeodesicResult:
    """Shortest edge path by Dijkstra with ties broken toward smaller vertex ids."""
    mesh = prob.mesh() if mesh is None else mesh
    n = prob.n
    corner, _ = _grid_index(n)
    src = corner(0, 0)
    dst = corner(n, n * prob.sigma // prob.tau)
    bad = _forbidden(prob)
    bad.discard(dst)
    adj = _edge_graph(mesh)

    dist = np.full(mesh.n_vertices, np.inf)
    prev = np.full(mesh.n_vertices, -1, dtype=np.int64)
    dist[src] = 0.0
    heap = [(0.0, src)]
    done = np.zeros(mesh.n_vertices, dtype=bool)
    while heap:
        d, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        if v == dst:
            break
        for w, length in adj[v]:
            if w in bad or done[w]:
                continue
            nd = d + length
            if nd < dist[w] or (nd == dist[w] and v < prev[w]):
                dist[w] = nd
                prev[w] = v
                heapq.heappush(heap, (nd, w))
    if not np.isfinite(dist[dst]):
        raise ValueError("endpoint unreachable")
    path = [dst]
    while path[-1] != src:
        path.append(int(prev[path[-1]]))
    path.reverse()
    return GeodesicResult(float(dist[dst]), path, mesh.vertices[path])


def canonical_geodesic(prob: GeodesicProblem) -> GeodesicResult:
    """Greedy optimal path that hugs the chord from above.

    Steps are horizontal cell sides or cell diagonals (through the center);
    a horizontal step is taken whenever it keeps the path on or above the
    line through the endpoints.
    """
    n, s, t = prob.n, prob.sigma, prob.tau
    corner, center = _grid_index(n)
    i = j = 0
    path = [corner(0, 0)]
    while i < n:
        if j * t >= (i + 1) * s:
            path.append(corner(i + 1, j))
        else:
            path.extend([center(i, j), corner(i + 1, j + 1)])
            j += 1
        i += 1
    mesh = prob.mesh()
    pts = mesh.vertices[path]
    length = float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
    return GeodesicResult(length, path, pts)


def geodesic_direction_check(points, tol: float = 1e-12) -> bool:
    """True iff every segment points along ``(1, 1)/sqrt(2)`` or ``(1, 0)``."""
    pts = np.asarray(points, dtype=float)
    d = np.diff(pts, axis=0)
    norm = np.linalg.norm(d, axis=1)
    if np.any(norm == 0):
        return False
    u = d / norm[:, None]
    ok = (np.linalg.norm(u - NU_DIAG, axis=1) <= tol) | (np.linalg.norm(u - NU_AXIS, axis=1) <= tol)
    return bool(np.all(ok))


def anisotropy_scan(n: int, directions) -> list[dict]:
    """Geodesic length per unit chord versus the octagon value at the chord normal.

    Parameters
    ----------
    n : int
        Grid subdivisions; every ``tau`` must divide it.
    directions : iterable of (sigma, tau)
    """
    rows, errors = [], []
    for sigma, tau in directions:
        try:
            prob = GeodesicProblem(int(sigma), int(tau), n)
        except ValueError as exc:
            errors.append(f"({sigma},{tau}): {exc}")
            continue
        geo = discrete_geodesic(prob)
        chord = math.hypot(1.0, sigma / tau)
        ratio = geo.length / chord
        phi = octagon_phi(np.array([sigma, -tau], dtype=float) / math.hypot(sigma, tau))
        rows.append({
            "theta": math.atan2(sigma, tau),
            "sigma": int(sigma),
            "tau": int(tau),
            "length": geo.length,
            "ratio": ratio,
            "phi": phi,
            "abs_error": abs(ratio - phi),
        })
    if errors:
        raise ValueError("invalid directions: " + "; ".join(errors))
    return rows


# -- P1 tents on an equilateral patch ------------------------------------

A_TENT = np.array([[11.0, -7.0], [-7.0, 11.0]])


def tent_ball_tv(lam: float, c) -> float:
    """``4 sqrt(3) lam |c|_1 + lam sqrt(c^T A c)`` with ``A = [[11, -7], [-7, 11]]``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    c = np.asarray(c, dtype=float)
    q = max(float(c @ A_TENT @ c), 0.0)
    return float(4.0 * math.sqrt(3.0) * lam * np.abs(c).sum() + lam * math.sqrt(q))


def tent_patch(lam: float) -> tuple[Mesh, int, int]:
    """Fourteen equilateral triangles of area ``lam`` around two adjacent vertices.

    Returns the mesh and the vertex ids of the two tent peaks. The ten
    triangles touching either peak are complemented by two more per row.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    s = math.sqrt(4.0 * lam / math.sqrt(3.0))
    h = s * math.sqrt(3.0) / 2.0
    ids: dict[tuple[int, int], int] = {}
    verts: list[tuple[float, float]] = []

    def P(a, b):
        if (a, b) not in ids:
            ids[(a, b)] = len(verts)
            verts.append((a * s + b * s / 2.0, b * h))
        return ids[(a, b)]

    def up(a, b):
        return (P(a, b), P(a + 1, b), P(a, b + 1))

    def down(a, b):
        return (P(a + 1, b), P(a + 1, b + 1), P(a, b + 1))

    z1, z2 = P(0, 0), P(1, 0)
    tris = [up(a, 0) for a in (-1, 0, 1)] + [down(a, 0) for a in (-2, -1, 0, 1)]
    tris += [up(a, -1) for a in (-1, 0, 1, 2)] + [down(a, -1) for a in (-1, 0, 1)]
    return mesh_from_arrays(np.array(verts), np.array(tris)), z1, z2


def tent_patch_tv(lam: float, c) -> float:
    """``tv_p1`` of ``c1 g_{z1} + c2 g_{z2}`` on :func:`tent_patch`."""
    mesh, z1, z2 = tent_patch(lam)
    y = np.zeros(mesh.n_vertices)
    y[z1], y[z2] = c
    return tv_p1(mesh, y)


def tent_patch_tv_closed_form(lam: float, c) -> float:
    """Hand-derived value of :func:`tent_patch_tv`.

    With side ``s`` (so ``lam = sqrt(3) s^2 / 4``) a hat has gradient
    ``2 / (sqrt(3) s)`` on each of its six triangles; on the two shared
    triangles the two gradients meet at 120 degrees. Summing area times
    gradient norm gives ``2 s |c|_1 + s sqrt(c1^2 - c1 c2 + c2^2)``.
    """
    s = math.sqrt(4.0 * lam / math.sqrt(3.0))
    c1, c2 = (float(v) for v in c)
    return 2.0 * s * (abs(c1) + abs(c2)) + s * math.sqrt(max(c1 * c1 - c1 * c2 + c2 * c2, 0.0))
