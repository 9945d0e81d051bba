"""Exact s-t max-flow / min-cut for undirected graphs with float capacities.

The solver is a two-tree augmenting-path method in the style of Boykov and
Kolmogorov.  Each undirected edge is modelled as two opposing arcs of
capacity ``c``; residuals at or below ``1e-12 * max(c)`` count as
saturated so rounding debris cannot keep the search alive.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .exceptions import InvariantViolation, TooLargeForEnumeration
from .graph import SINK_SIDE, SOURCE_SIDE, WeightedGraph, cut_value

SATURATION_RTOL = 1e-12
CERTIFY_RTOL = 1e-9
BRUTE_FORCE_MAX_NODES = 22

_FREE, _S, _T = 0, 1, 2
_NONE, _ROOT = -1, -2


@nb.njit(cache=True)
def _origin_distance(parent, head, ts, dist, clock, w):
    """Distance from ``w`` to its tree root, or -1 if ``w`` hangs off an orphan."""
    d = 0
    while True:
        if ts[w] == clock:
            d += dist[w]
            break
        pa = parent[w]
        d += 1
        if pa == _ROOT:
            ts[w] = clock
            dist[w] = 1
            break
        if pa == _NONE:
            return -1
        w = head[pa]
    return d


@nb.njit(cache=True)
def _stamp_path(parent, head, ts, dist, clock, w, d):
    while ts[w] != clock:
        ts[w] = clock
        dist[w] = d
        d -= 1
        w = head[parent[w]]


@nb.njit(cache=True)
def _bk_maxflow(n, first, arcs, head, res, s, t, thr):
    tree = np.zeros(n, dtype=np.int8)
    parent = np.full(n, _NONE, dtype=np.int64)
    ts = np.zeros(n, dtype=np.int64)
    dist = np.zeros(n, dtype=np.int64)
    in_q = np.zeros(n, dtype=np.bool_)
    qbuf = np.empty(n + 1, dtype=np.int64)
    qhead = 0
    qtail = 0
    cap_q = n + 1
    orphans = np.empty(n + 1, dtype=np.int64)
    clock = 1

    tree[s] = _S
    tree[t] = _T
    parent[s] = _ROOT
    parent[t] = _ROOT
    ts[s] = clock
    ts[t] = clock
    dist[s] = 1
    dist[t] = 1
    for r in (s, t):
        qbuf[qtail] = r
        qtail = (qtail + 1) % cap_q
        in_q[r] = True

    flow = 0.0
    augmentations = 0
    while True:
        meet = -1
        while qhead != qtail:
            p = qbuf[qhead]
            if tree[p] != _FREE:
                tp = tree[p]
                for k in range(first[p], first[p + 1]):
                    a = arcs[k]
                    q = head[a]
                    cap = res[a] if tp == _S else res[a ^ 1]
                    if cap <= thr:
                        continue
                    if tree[q] == _FREE:
                        tree[q] = tp
                        parent[q] = a ^ 1
                        ts[q] = ts[p]
                        dist[q] = dist[p] + 1
                        if not in_q[q]:
                            qbuf[qtail] = q
                            qtail = (qtail + 1) % cap_q
                            in_q[q] = True
                    elif tree[q] != tp:
                        meet = a if tp == _S else a ^ 1
                        break
                    elif ts[q] <= ts[p] and dist[q] > dist[p]:
                        # shorter route to the root through p
                        parent[q] = a ^ 1
                        ts[q] = ts[p]
                        dist[q] = dist[p] + 1
                if meet >= 0:
                    break
            qhead = (qhead + 1) % cap_q
            in_q[p] = False
        if meet < 0:
            break

        # bottleneck along s ~> x -> y ~> t
        x = head[meet ^ 1]
        y = head[meet]
        f = res[meet]
        u = x
        while parent[u] != _ROOT:
            a = parent[u]
            if res[a ^ 1] < f:
                f = res[a ^ 1]
            u = head[a]
        u = y
        while parent[u] != _ROOT:
            a = parent[u]
            if res[a] < f:
                f = res[a]
            u = head[a]

        # orphans are processed FIFO from a circular buffer
        oh = 0
        ot = 0
        res[meet] -= f
        res[meet ^ 1] += f
        u = x
        while parent[u] != _ROOT:
            a = parent[u]
            nxt = head[a]
            res[a ^ 1] -= f
            res[a] += f
            if res[a ^ 1] <= thr:
                parent[u] = _NONE
                orphans[ot] = u
                ot = (ot + 1) % (n + 1)
            u = nxt
        u = y
        while parent[u] != _ROOT:
            a = parent[u]
            nxt = head[a]
            res[a] -= f
            res[a ^ 1] += f
            if res[a] <= thr:
                parent[u] = _NONE
                orphans[ot] = u
                ot = (ot + 1) % (n + 1)
            u = nxt
        flow += f
        augmentations += 1
        clock += 1

        while oh != ot:
            o = orphans[oh]
            oh = (oh + 1) % (n + 1)
            side = tree[o]
            best_arc = -1
            best_d = 1 << 62
            for k in range(first[o], first[o + 1]):
                a = arcs[k]
                q = head[a]
                if tree[q] != side:
                    continue
                cap = res[a ^ 1] if side == _S else res[a]
                if cap <= thr:
                    continue
                d = _origin_distance(parent, head, ts, dist, clock, q)
                if d >= 0:
                    if d < best_d:
                        best_d = d
                        best_arc = a
                    _stamp_path(parent, head, ts, dist, clock, q, d)
            if best_arc >= 0:
                parent[o] = best_arc
                ts[o] = clock
                dist[o] = best_d + 1
                continue
            for k in range(first[o], first[o + 1]):
                a = arcs[k]
                q = head[a]
                if tree[q] != side:
                    continue
                cap = res[a ^ 1] if side == _S else res[a]
                if cap > thr and not in_q[q]:
                    qbuf[qtail] = q
                    qtail = (qtail + 1) % cap_q
                    in_q[q] = True
                pq = parent[q]
                if pq >= 0 and head[pq] == o:
                    parent[q] = _NONE
                    orphans[ot] = q
                    ot = (ot + 1) % (n + 1)
            tree[o] = _FREE
    return flow, augmentations


@nb.njit(cache=True)
def _reachable(n, first, arcs, head, res, s, thr):
    seen = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    top = 0
    stack[top] = s
    top += 1
    seen[s] = True
    while top > 0:
        top -= 1
        u = stack[top]
        for k in range(first[u], first[u + 1]):
            a = arcs[k]
            q = head[a]
            if not seen[q] and res[a] > thr:
                seen[q] = True
                stack[top] = q
                top += 1
    return seen


@dataclass
class ResidualNetwork:
    """Two opposing arcs per undirected edge; arc ``2e`` runs ``u -> v``.

    ``first``/``arcs`` list the outgoing arcs of every node and ``head``
    gives each arc's target.
    """

    graph: WeightedGraph
    first: np.ndarray
    arcs: np.ndarray
    head: np.ndarray
    residual: np.ndarray
    threshold: float

    @classmethod
    def build(cls, g: WeightedGraph) -> "ResidualNetwork":
        indptr, _, eid = g.adjacency
        ends = np.repeat(np.arange(g.n), np.diff(indptr))
        arcs = (2 * eid + (g.edge_u[eid] != ends)).astype(np.int64)
        head = np.empty(2 * g.m, dtype=np.int64)
        head[0::2] = g.edge_v
        head[1::2] = g.edge_u
        res = np.repeat(g.capacity, 2).astype(np.float64)
        thr = SATURATION_RTOL * float(g.capacity.max())
        return cls(g, indptr.astype(np.int64), arcs, head, res, thr)

    def pair_sums(self) -> np.ndarray:
        """``residual(u->v) + residual(v->u)`` per edge; equals ``2c`` throughout."""
        return self.residual[0::2] + self.residual[1::2]

    def augment_fully(self) -> float:
        g = self.graph
        flow, _ = _bk_maxflow(g.n, self.first, self.arcs, self.head, self.residual,
                              g.source, g.sink, self.threshold)
        return float(flow)

    def source_side(self) -> np.ndarray:
        g = self.graph
        return _reachable(g.n, self.first, self.arcs, self.head, self.residual,
                          g.source, self.threshold)


def max_flow(g: WeightedGraph, certify: bool = True, network: ResidualNetwork | None = None):
    """Return ``(flow_value, labeling)`` with side 1 = reachable from s.

    The labeling is the source side of the final residual graph.  With
    ``certify`` the cut value of that labeling must match the flow value to
    ``1e-9`` relative, otherwise :class:`InvariantViolation` is raised.
    A fresh ``network`` may be passed in to inspect residuals afterwards.
    """
    net = network or ResidualNetwork.build(g)
    flow = net.augment_fully()
    seen = net.source_side()
    if seen[g.sink]:
        raise InvariantViolation("sink still reachable after max-flow terminated")
    labeling = np.where(seen, SOURCE_SIDE, SINK_SIDE).astype(np.int8)
    if certify:
        cv = cut_value(g, labeling)
        if abs(cv - flow) > CERTIFY_RTOL * max(abs(cv), 1e-300):
            raise InvariantViolation(f"cut value {cv!r} != flow value {flow!r}")
    return flow, labeling


def min_cut(g: WeightedGraph):
    """``(cut_value, labeling)`` from :func:`max_flow`, value recomputed from the cut."""
    _, lab = max_flow(g)
    return cut_value(g, lab), lab


def brute_force_min_cut(g: WeightedGraph):
    """Exhaustive minimum over all ``2^(n-2)`` s-t labelings.

    Ties (values within ``1e-12`` relative of the minimum) go to the
    lexicographically smallest labeling vector.
    """
    if g.n > BRUTE_FORCE_MAX_NODES:
        raise TooLargeForEnumeration(f"{g.n} nodes > {BRUTE_FORCE_MAX_NODES}")
    others = [x for x in range(g.n) if x not in (g.source, g.sink)]
    k = len(others)
    masks = np.arange(1 << k, dtype=np.int64)
    side = np.zeros((g.n, masks.size), dtype=np.int8)
    side[g.source] = 1
    for bit, node in enumerate(others):
        side[node] = (masks >> bit) & 1
    values = np.zeros(masks.size)
    for a, b, c in zip(g.edge_u.tolist(), g.edge_v.tolist(), g.capacity.tolist()):
        values += c * (side[a] != side[b])
    best = values.min()
    cand = np.flatnonzero(values <= best + 1e-12 * abs(best))
    lex = side[:, cand].T.astype(np.int64)
    pick = cand[np.lexsort(lex.T[::-1])[0]]
    labeling = side[:, pick].copy()
    return float(values[pick]), labeling
