"""Triangulations of rectangles and their dual-graph data.

Two mesh families are provided:

* the periodic "double diagonal" mesh, where every square cell is split by
  both diagonals into four triangles meeting at the cell center;
* a jittered structured mesh (one diagonal per cell, alternating by
  checkerboard) whose interior vertices are perturbed pseudo-randomly.

Triangles are numbered row-major over cells. Within a double-diagonal cell
the sub-triangle order is bottom, right, top, left.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "MeshKind",
    "MeshSpec",
    "Mesh",
    "MeshError",
    "build_double_diagonal",
    "build_jittered",
    "build_mesh",
    "dual_graph",
    "mesh_from_arrays",
]


class MeshError(ValueError):
    """Invalid mesh parameters or a degenerate triangulation."""


class MeshKind(str, Enum):
    DOUBLE_DIAGONAL = "double_diagonal"
    JITTERED = "jittered"


@dataclass(frozen=True)
class MeshSpec:
    kind: MeshKind = MeshKind.DOUBLE_DIAGONAL
    n: int = 8
    jitter: float = 0.0
    seed: int = 0
    domain: tuple[float, float, float, float] = (-1.0, 1.0, -1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "kind", MeshKind(self.kind))
        if int(self.n) != self.n or self.n < 1:
            raise MeshError(f"n must be a positive integer, got {self.n!r}")
        if not 0.0 <= self.jitter < 0.25:
            raise MeshError(f"jitter must lie in [0, 0.25), got {self.jitter!r}")
        x0, x1, y0, y1 = self.domain
        if not (x1 > x0 and y1 > y0):
            raise MeshError(f"degenerate domain {self.domain!r}")


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable triangulation with dual-graph data.

    Attributes
    ----------
    vertices : ndarray, shape (n_vertices, 2)
    triangles : ndarray, shape (n_triangles, 3)
        Counterclockwise vertex triples.
    areas : ndarray, shape (n_triangles,)
    interior_edges : ndarray, shape (n_interior, 2)
        Pairs ``(tri_a, tri_b)`` with ``tri_a < tri_b`` sharing an edge.
    interior_lengths : ndarray, shape (n_interior,)
    interior_edge_vertices : ndarray, shape (n_interior, 2)
        Endpoints of each shared edge.
    boundary_edges : ndarray, shape (n_boundary,)
        Triangle owning each boundary edge.
    boundary_lengths : ndarray, shape (n_boundary,)
    boundary_edge_vertices : ndarray, shape (n_boundary, 2)
    bbox : tuple
        ``(x0, x1, y0, y1)``.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    areas: np.ndarray
    interior_edges: np.ndarray
    interior_lengths: np.ndarray
    interior_edge_vertices: np.ndarray
    boundary_edges: np.ndarray
    boundary_lengths: np.ndarray
    boundary_edge_vertices: np.ndarray
    bbox: tuple
    spec: MeshSpec | None = field(default=None)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def domain_area(self) -> float:
        x0, x1, y0, y1 = self.bbox
        return (x1 - x0) * (y1 - y0)

    @property
    def boundary_vertices(self) -> np.ndarray:
        """Sorted indices of vertices lying on a boundary edge."""
        return np.unique(self.boundary_edge_vertices)

    @property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    def canonical_bytes(self) -> bytes:
        """Byte serialization used for determinism checks."""
        parts = [
            self.vertices, self.triangles, self.areas,
            self.interior_edges, self.interior_lengths,
            self.boundary_edges, self.boundary_lengths,
        ]
        return b"".join(np.ascontiguousarray(a).tobytes() for a in parts)


def _signed_areas(vertices, triangles):
    p = vertices[triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def _from_arrays(vertices, triangles, bbox, spec=None) -> Mesh:
    vertices = np.asarray(vertices, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64)
    areas = _signed_areas(vertices, triangles)
    if np.any(areas <= 0):
        raise MeshError("triangulation has non-positive (or clockwise) triangles")

    n_tri = len(triangles)
    # local edge k of a triangle is opposite to local vertex k
    local = np.array([[1, 2], [2, 0], [0, 1]])
    ev = triangles[:, local].reshape(-1, 2)
    owner = np.repeat(np.arange(n_tri), 3)
    key = np.sort(ev, axis=1)
    order = np.lexsort((owner, key[:, 1], key[:, 0]))
    key, owner, ev = key[order], owner[order], ev[order]

    same_next = np.all(key[1:] == key[:-1], axis=1)
    if np.any(same_next[1:] & same_next[:-1]):
        raise MeshError("an edge is shared by more than two triangles")

    first = np.flatnonzero(same_next)
    second = first + 1
    paired = np.zeros(len(key), dtype=bool)
    paired[first] = True
    paired[second] = True
    single = np.flatnonzero(~paired)

    interior_edges = np.stack([owner[first], owner[second]], axis=1)
    interior_edge_vertices = key[first]
    interior_lengths = np.linalg.norm(
        vertices[interior_edge_vertices[:, 1]] - vertices[interior_edge_vertices[:, 0]], axis=1
    )
    # deterministic order: by triangle pair
    o = np.lexsort((interior_edges[:, 1], interior_edges[:, 0]))
    interior_edges = interior_edges[o]
    interior_edge_vertices = interior_edge_vertices[o]
    interior_lengths = interior_lengths[o]

    boundary_edges = owner[single]
    boundary_edge_vertices = ev[single]
    boundary_lengths = np.linalg.norm(
        vertices[boundary_edge_vertices[:, 1]] - vertices[boundary_edge_vertices[:, 0]], axis=1
    )
    o = np.lexsort((boundary_edge_vertices[:, 0], boundary_edges))
    boundary_edges = boundary_edges[o]
    boundary_edge_vertices = boundary_edge_vertices[o]
    boundary_lengths = boundary_lengths[o]

    if np.any(interior_lengths <= 0) or np.any(boundary_lengths <= 0):
        raise MeshError("zero-length edge")

    return Mesh(
        vertices=vertices,
        triangles=triangles,
        areas=areas,
        interior_edges=interior_edges,
        interior_lengths=interior_lengths,
        interior_edge_vertices=interior_edge_vertices,
        boundary_edges=boundary_edges,
        boundary_lengths=boundary_lengths,
        boundary_edge_vertices=boundary_edge_vertices,
        bbox=tuple(float(b) for b in bbox),
        spec=spec,
    )


def mesh_from_arrays(vertices, triangles) -> Mesh:
    """Mesh from explicit counterclockwise triangles; bbox is the vertex hull."""
    v = np.asarray(vertices, dtype=float)
    bbox = (v[:, 0].min(), v[:, 0].max(), v[:, 1].min(), v[:, 1].max())
    return _from_arrays(v, triangles, bbox)


def _grid_vertices(n, domain):
    x0, x1, y0, y1 = domain
    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    gx, gy = np.meshgrid(xs, ys)  # row-major: index = j*(n+1) + i
    return np.column_stack([gx.ravel(), gy.ravel()])


def build_double_diagonal(spec: MeshSpec) -> Mesh:
    """n x n cells, each split by both diagonals into four triangles.

    Vertices are the grid corners (row-major) followed by the cell centers
    (row-major), ``(n+1)**2 + n**2`` in total.
    """
    if spec.kind is not MeshKind.DOUBLE_DIAGONAL:
        raise MeshError(f"expected a double_diagonal MeshSpec, got {spec.kind.value}")
    n = spec.n
    x0, x1, y0, y1 = spec.domain
    corners = _grid_vertices(n, spec.domain)
    hx, hy = (x1 - x0) / n, (y1 - y0) / n
    cx = x0 + hx * (np.arange(n) + 0.5)
    cy = y0 + hy * (np.arange(n) + 0.5)
    gx, gy = np.meshgrid(cx, cy)
    centers = np.column_stack([gx.ravel(), gy.ravel()])
    vertices = np.vstack([corners, centers])

    j, i = np.divmod(np.arange(n * n), n)
    v00 = j * (n + 1) + i
    v10 = v00 + 1
    v01 = v00 + (n + 1)
    v11 = v01 + 1
    c = (n + 1) ** 2 + j * n + i
    tris = np.stack(
        [
            np.column_stack([v00, v10, c]),  # bottom
            np.column_stack([v10, v11, c]),  # right
            np.column_stack([v11, v01, c]),  # top
            np.column_stack([v01, v00, c]),  # left
        ],
        axis=1,
    ).reshape(-1, 3)
    return _from_arrays(vertices, tris, spec.domain, spec)


def _structured_triangles(n):
    j, i = np.divmod(np.arange(n * n), n)
    v00 = j * (n + 1) + i
    v10 = v00 + 1
    v01 = v00 + (n + 1)
    v11 = v01 + 1
    even = ((i + j) % 2 == 0)[:, None]
    a = np.where(even, np.column_stack([v00, v10, v11]), np.column_stack([v00, v10, v01]))
    b = np.where(even, np.column_stack([v00, v11, v01]), np.column_stack([v10, v11, v01]))
    return np.stack([a, b], axis=1).reshape(-1, 3)


def build_jittered(spec: MeshSpec) -> Mesh:
    """Single-diagonal structured mesh with seeded interior-vertex jitter.

    Each interior grid vertex is displaced by a uniform offset of at most
    ``jitter * h`` per coordinate. Connectivity does not depend on the jitter.
    """
    if spec.kind is not MeshKind.JITTERED:
        raise MeshError(f"expected a jittered MeshSpec, got {spec.kind.value}")
    n = spec.n
    x0, x1, y0, y1 = spec.domain
    vertices = _grid_vertices(n, spec.domain)
    if spec.jitter > 0 and n > 1:
        h = np.array([(x1 - x0) / n, (y1 - y0) / n])
        rng = np.random.default_rng(spec.seed)
        jj, ii = np.divmod(np.arange(len(vertices)), n + 1)
        interior = (ii > 0) & (ii < n) & (jj > 0) & (jj < n)
        offsets = rng.uniform(-1.0, 1.0, size=(int(interior.sum()), 2)) * spec.jitter * h
        vertices[interior] += offsets
    mesh = _from_arrays(vertices, _structured_triangles(n), spec.domain, spec)
    assert np.all(mesh.areas > 0)
    return mesh


def build_mesh(spec: MeshSpec) -> Mesh:
    if spec.kind is MeshKind.DOUBLE_DIAGONAL:
        return build_double_diagonal(spec)
    return build_jittered(spec)


def dual_graph(mesh: Mesh) -> list[list[tuple[int, float]]]:
    """Per-triangle neighbor lists ``[(neighbor, shared_length), ...]``."""
    nbrs: list[list[tuple[int, float]]] = [[] for _ in range(mesh.n_triangles)]
    for (a, b), w in zip(mesh.interior_edges.tolist(), mesh.interior_lengths.tolist()):
        nbrs[a].append((b, w))
        nbrs[b].append((a, w))
    for lst in nbrs:
        lst.sort()
    return nbrs
