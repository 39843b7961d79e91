"""Exact s-t max-flow / min-cut with Dinic's algorithm.

The network API mirrors the usual graph-cut libraries: interior nodes are
``0..n-1``, undirected neighbor edges are added with :meth:`FlowNetwork.add_edge`
and terminal capacities with :meth:`FlowNetwork.add_tedge`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

__all__ = ["SOURCE", "SINK", "FlowNetwork", "CutResult", "max_flow", "verify_cut"]

SOURCE = -1
SINK = -2


@dataclass(frozen=True)
class CutResult:
    flow: float
    sink_side: np.ndarray  # nodes unreachable from the source in the residual graph
    pair_flow: np.ndarray | None = None  # net flow u -> v per added arc pair

    def source_side_mask(self, n: int) -> np.ndarray:
        mask = np.ones(n, dtype=bool)
        mask[self.sink_side] = False
        return mask


@numba.njit(cache=True)
def _dinic(n, start, head, cap, rev, s, t, eps):  # pragma: no cover - jitted
    flow = 0.0
    level = np.empty(n, np.int64)
    it = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    path = np.empty(n, np.int64)
    nodes = np.empty(n + 1, np.int64)
    while True:
        level[:] = -1
        level[s] = 0
        qh, qt = 0, 1
        queue[0] = s
        while qh < qt:
            u = queue[qh]
            qh += 1
            for a in range(start[u], start[u + 1]):
                v = head[a]
                if level[v] < 0 and cap[a] > eps:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
        if level[t] < 0:
            break
        for u in range(n):
            it[u] = start[u]
        depth = 0
        u = s
        nodes[0] = s
        while True:
            if u == t:
                b = cap[path[0]]
                for i in range(1, depth):
                    if cap[path[i]] < b:
                        b = cap[path[i]]
                for i in range(depth):
                    a = path[i]
                    cap[a] -= b
                    cap[rev[a]] += b
                flow += b
                # retreat to the tail of the first saturated arc
                k = 0
                while k < depth and cap[path[k]] > eps:
                    k += 1
                depth = k
                u = nodes[depth]
                continue
            advanced = False
            while it[u] < start[u + 1]:
                a = it[u]
                v = head[a]
                if cap[a] > eps and level[v] == level[u] + 1:
                    path[depth] = a
                    depth += 1
                    nodes[depth] = v
                    u = v
                    advanced = True
                    break
                it[u] += 1
            if not advanced:
                level[u] = -1
                if depth == 0:
                    break
                depth -= 1
                u = nodes[depth]
                it[u] += 1
    # residual reachability from the source
    seen = np.zeros(n, np.bool_)
    seen[s] = True
    qh, qt = 0, 1
    queue[0] = s
    while qh < qt:
        u = queue[qh]
        qh += 1
        for a in range(start[u], start[u + 1]):
            v = head[a]
            if not seen[v] and cap[a] > eps:
                seen[v] = True
                queue[qt] = v
                qt += 1
    return flow, seen


class FlowNetwork:
    """Capacitated directed graph with a source and a sink pseudo-node.

    Arcs are stored in antiparallel pairs; an undirected edge of weight
    ``w`` is a pair with capacity ``w`` in both directions.
    """

    def __init__(self, n_nodes: int):
        if n_nodes < 0:
            raise ValueError("node count must be nonnegative")
        self.n_nodes = int(n_nodes)
        self._u: list[np.ndarray] = []
        self._v: list[np.ndarray] = []
        self._cuv: list[np.ndarray] = []
        self._cvu: list[np.ndarray] = []

    def _index(self, i):
        i = np.asarray(i, dtype=np.int64)
        out = i.copy()
        out[i == SOURCE] = self.n_nodes
        out[i == SINK] = self.n_nodes + 1
        bad = (i < 0) & (i != SOURCE) & (i != SINK) | (i >= self.n_nodes)
        if np.any(bad):
            raise IndexError("node index out of range")
        return out

    def _add_pairs(self, u, v, cuv, cvu):
        u, v = np.atleast_1d(self._index(u)), np.atleast_1d(self._index(v))
        cuv = np.broadcast_to(np.asarray(cuv, dtype=float), u.shape).copy()
        cvu = np.broadcast_to(np.asarray(cvu, dtype=float), u.shape).copy()
        if np.any(cuv < 0) or np.any(cvu < 0) or not (np.all(np.isfinite(cuv)) and np.all(np.isfinite(cvu))):
            raise ValueError("capacities must be finite and nonnegative")
        self._u.append(u)
        self._v.append(v)
        self._cuv.append(cuv)
        self._cvu.append(cvu)

    def add_arc(self, i, j, cap):
        """Directed arc(s) ``i -> j``; ``i``/``j`` may be SOURCE or SINK."""
        self._add_pairs(i, j, cap, 0.0)

    def add_edge(self, i, j, cap):
        """Undirected edge(s) between interior nodes."""
        self._add_pairs(i, j, cap, cap)

    def add_tedge(self, i, cap_source, cap_sink):
        """Terminal arcs ``s -> i`` and ``i -> t``."""
        i = np.atleast_1d(np.asarray(i, dtype=np.int64))
        self._add_pairs(np.full(i.shape, SOURCE), i, cap_source, 0.0)
        self._add_pairs(i, np.full(i.shape, SINK), cap_sink, 0.0)

    def pairs(self):
        """Arc pairs as added: ``(u, v, cap_uv, cap_vu)`` with terminals mapped to n, n+1."""
        if not self._u:
            e = np.empty(0, dtype=np.int64)
            return e, e, np.empty(0), np.empty(0)
        return tuple(np.concatenate(x) for x in (self._u, self._v, self._cuv, self._cvu))

    def arcs(self):
        """All arcs as ``(tail, head, capacity)`` with terminals mapped to n, n+1."""
        if not self._u:
            e = np.empty(0, dtype=np.int64)
            return e, e, np.empty(0)
        u = np.concatenate(self._u)
        v = np.concatenate(self._v)
        cuv = np.concatenate(self._cuv)
        cvu = np.concatenate(self._cvu)
        return np.concatenate([u, v]), np.concatenate([v, u]), np.concatenate([cuv, cvu])

    def max_flow(self) -> CutResult:
        n = self.n_nodes + 2
        s, t = self.n_nodes, self.n_nodes + 1
        if not self._u:
            return CutResult(0.0, np.arange(0, dtype=np.int64), np.zeros(0))
        u = np.concatenate(self._u)
        v = np.concatenate(self._v)
        cuv = np.concatenate(self._cuv)
        cvu = np.concatenate(self._cvu)
        m = len(u)
        # arc 2k: u->v, arc 2k+1: v->u
        tail = np.empty(2 * m, np.int64)
        head = np.empty(2 * m, np.int64)
        cap = np.empty(2 * m)
        tail[0::2], tail[1::2] = u, v
        head[0::2], head[1::2] = v, u
        cap[0::2], cap[1::2] = cuv, cvu
        order = np.argsort(tail, kind="stable")
        pos = np.empty(2 * m, np.int64)
        pos[order] = np.arange(2 * m)
        rev = np.empty(2 * m, np.int64)
        rev[pos] = pos[np.arange(2 * m) ^ 1]
        head, cap = head[order], cap[order]
        start = np.zeros(n + 1, np.int64)
        np.cumsum(np.bincount(tail, minlength=n), out=start[1:])
        cmax = float(cap.max()) if cap.size else 0.0
        eps = 1e-15 * cmax
        flow, seen = _dinic(n, start, head, cap, rev, s, t, eps)
        # nodes without any positive-capacity arc are reported with the source
        touched = np.zeros(n, dtype=bool)
        live = np.r_[cuv, cvu] > 0
        touched[np.r_[u, v][live]] = True
        touched[np.r_[v, u][live]] = True
        sink_side = np.flatnonzero(~seen[: self.n_nodes] & touched[: self.n_nodes])
        residual = cap[pos]  # back to the order in which arcs were added
        return CutResult(float(flow), sink_side, cuv - residual[0::2])


def max_flow(net: FlowNetwork) -> CutResult:
    return net.max_flow()


def verify_cut(net: FlowNetwork, cut: CutResult) -> float:
    """Capacity of arcs crossing from the source side to the sink side."""
    tail, head, cap = net.arcs()
    n = net.n_nodes
    on_sink = np.zeros(n + 2, dtype=bool)
    on_sink[cut.sink_side] = True
    on_sink[n + 1] = True
    crossing = ~on_sink[tail] & on_sink[head]
    return float(cap[crossing].sum())
