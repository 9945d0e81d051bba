"""Weighted undirected s-t graphs and the static structure built from them.

Node ids are dense ``0..n-1`` after ingest; the original labels are kept in
``WeightedGraph.labels`` for output.  Every edge is stored once with
``u < v``, which doubles as the fixed orientation of the incidence operator.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .exceptions import (
    DisconnectedGraph,
    InputError,
    InvalidLabeling,
    NonPositiveCapacity,
    SourceEqualsSink,
)

logger = logging.getLogger(__name__)

SOURCE_SIDE = 1
SINK_SIDE = 0


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Validated undirected graph with positive capacities and terminals.

    Construct through :func:`ingest` or :meth:`from_arrays`; the instance is
    treated as immutable and may be shared between threads.
    """

    node_count: int
    edge_u: np.ndarray
    edge_v: np.ndarray
    capacity: np.ndarray
    source: int
    sink: int
    labels: tuple = field(default=())

    @property
    def n(self) -> int:
        return self.node_count

    @property
    def m(self) -> int:
        return int(self.capacity.shape[0])

    @classmethod
    def from_arrays(cls, node_count, u, v, c, source, sink, labels=None,
                    check_connected=True) -> "WeightedGraph":
        """Build from dense integer endpoint arrays, merging parallel edges."""
        n = int(node_count)
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        c = np.asarray(c, dtype=np.float64).ravel()
        if not (u.shape == v.shape == c.shape):
            raise InputError("edge arrays must have equal length")
        if n < 2:
            raise InputError("graph needs at least two nodes")
        source, sink = int(source), int(sink)
        if source == sink:
            raise SourceEqualsSink(f"source and sink are both node {source}")
        for name, node in (("source", source), ("sink", sink)):
            if not 0 <= node < n:
                raise InputError(f"{name} {node} out of range 0..{n - 1}")
        if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise InputError("edge endpoint out of range")
        if not np.all(np.isfinite(c)) or np.any(c <= 0):
            bad = int(np.flatnonzero(~(c > 0) | ~np.isfinite(c))[0])
            raise NonPositiveCapacity(
                f"edge ({int(u[bad])}, {int(v[bad])}) has capacity {float(c[bad])!r}")
        loops = u == v
        if loops.any():
            logger.warning("dropping %d self-loop(s)", int(loops.sum()))
            u, v, c = u[~loops], v[~loops], c[~loops]
        if u.size == 0:
            raise DisconnectedGraph("graph has no edges")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        keys, inverse = np.unique(lo * n + hi, return_inverse=True)
        merged = np.bincount(inverse, weights=c, minlength=keys.size)
        eu, ev = keys // n, keys % n
        if labels is None:
            labels = tuple(range(n))
        g = cls(n, eu, ev, merged, source, sink, tuple(labels))
        for arr in (g.edge_u, g.edge_v, g.capacity):
            arr.setflags(write=False)
        if check_connected and not g.is_connected():
            raise DisconnectedGraph("graph is not connected")
        return g

    def is_connected(self) -> bool:
        ncomp, _ = csgraph.connected_components(self.adjacency_matrix, directed=False)
        return ncomp == 1

    @cached_property
    def adjacency_matrix(self) -> sparse.csr_matrix:
        """Symmetric weighted adjacency matrix."""
        rows = np.concatenate([self.edge_u, self.edge_v])
        cols = np.concatenate([self.edge_v, self.edge_u])
        vals = np.concatenate([self.capacity, self.capacity])
        return sparse.csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR-style incidence lists ``(indptr, neighbor, edge_id)``.

        Neighbors of each node are ordered by edge id, so iteration order is
        deterministic.
        """
        ends = np.concatenate([self.edge_u, self.edge_v])
        other = np.concatenate([self.edge_v, self.edge_u])
        eid = np.concatenate([np.arange(self.m), np.arange(self.m)])
        order = np.lexsort((eid, ends))
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(ends, minlength=self.n), out=indptr[1:])
        return indptr, other[order], eid[order]

    @cached_property
    def weighted_degree(self) -> np.ndarray:
        return (np.bincount(self.edge_u, weights=self.capacity, minlength=self.n)
                + np.bincount(self.edge_v, weights=self.capacity, minlength=self.n))

    @property
    def total_capacity(self) -> float:
        return float(self.capacity.sum())

    def laplacian(self, conductance=None) -> sparse.csr_matrix:
        """Full graph Laplacian, optionally with per-edge conductances."""
        w = self.capacity if conductance is None else np.asarray(conductance, float)
        adj = sparse.csr_matrix(
            (np.concatenate([w, w]),
             (np.concatenate([self.edge_u, self.edge_v]),
              np.concatenate([self.edge_v, self.edge_u]))),
            shape=(self.n, self.n))
        deg = np.asarray(adj.sum(axis=1)).ravel()
        return (sparse.diags(deg) - adj).tocsr()

    def edge_list(self) -> list[tuple[Hashable, Hashable, float]]:
        """Canonical edge list using the original node labels."""
        lab = self.labels
        return [(lab[a], lab[b], float(c))
                for a, b, c in zip(self.edge_u.tolist(), self.edge_v.tolist(),
                                   self.capacity.tolist())]

    def scaled(self, alpha: float) -> "WeightedGraph":
        return WeightedGraph.from_arrays(self.n, self.edge_u, self.edge_v,
                                         alpha * self.capacity, self.source,
                                         self.sink, self.labels)

    @cached_property
    def incidence(self) -> "IncidenceOperator":
        return IncidenceOperator(self.edge_u, self.edge_v, self.n)


def ingest(edge_list: Iterable[Sequence], s: Hashable, t: Hashable,
           nodes: Iterable[Hashable] | None = None) -> WeightedGraph:
    """Validate an edge list ``[(u, v, c), ...]`` and remap ids densely.

    Labels are sorted when they are mutually comparable, otherwise kept in
    first-seen order.  ``nodes`` may list extra labels (e.g. a declared node
    count), which makes isolated nodes visible to the connectivity check.
    """
    triples = [tuple(e) for e in edge_list]
    if not triples:
        raise InputError("edge list is empty")
    if s == t:
        raise SourceEqualsSink(f"source and sink are both {s!r}")
    seen: dict[Hashable, None] = {}
    for lab in (nodes or ()):
        seen.setdefault(lab)
    for e in triples:
        if len(e) != 3:
            raise InputError(f"edge {e!r} is not a (u, v, capacity) triple")
        seen.setdefault(e[0])
        seen.setdefault(e[1])
    seen.setdefault(s)
    seen.setdefault(t)
    labels = list(seen)
    try:
        labels.sort()
    except TypeError:
        pass
    index = {lab: i for i, lab in enumerate(labels)}
    u = np.fromiter((index[e[0]] for e in triples), np.int64, len(triples))
    v = np.fromiter((index[e[1]] for e in triples), np.int64, len(triples))
    c = np.fromiter((float(e[2]) for e in triples), np.float64, len(triples))
    return WeightedGraph.from_arrays(len(labels), u, v, c, index[s], index[t],
                                     labels=labels)


class IncidenceOperator:
    """Oriented edge-node incidence matrix applied without materializing it.

    Row ``i`` has ``+1`` at ``tail[i]`` and ``-1`` at ``head[i]``.
    """

    def __init__(self, tail, head, n):
        self.tail = np.asarray(tail, dtype=np.int64)
        self.head = np.asarray(head, dtype=np.int64)
        self.n = int(n)

    @property
    def shape(self):
        return (self.tail.size, self.n)

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        return x[self.tail] - x[self.head]

    def rmatvec(self, z):
        z = np.asarray(z, dtype=float)
        return (np.bincount(self.tail, weights=z, minlength=self.n)
                - np.bincount(self.head, weights=z, minlength=self.n))

    def todense(self):
        B = np.zeros(self.shape)
        rows = np.arange(self.tail.size)
        B[rows, self.tail] = 1.0
        B[rows, self.head] = -1.0
        return B


@dataclass(frozen=True, eq=False)
class TerminalSplit:
    """Classification of every edge as non-terminal, terminal or direct s-t.

    ``nonterminal_nodes`` lists ``V - {s, t}`` in increasing id order;
    ``local_index`` maps a graph node id to its position there (-1 for the
    terminals).
    """

    nonterminal_nodes: np.ndarray
    local_index: np.ndarray
    nt_edges: np.ndarray
    term_edges: np.ndarray
    term_node: np.ndarray
    term_to_source: np.ndarray
    st_edges: np.ndarray
    st_capacity: float

    @property
    def nt_count(self) -> int:
        return int(self.nonterminal_nodes.size)

    def nonterminal_graph(self, g: WeightedGraph):
        """``(n_nt, u_local, v_local, capacity)`` of the induced subgraph."""
        li = self.local_index
        e = self.nt_edges
        return (self.nt_count, li[g.edge_u[e]], li[g.edge_v[e]], g.capacity[e])

    def terminal_edges(self, g: WeightedGraph) -> list[tuple[int, str, float]]:
        return [(int(a), "s" if to_s else "t", float(g.capacity[e]))
                for a, to_s, e in zip(self.term_node, self.term_to_source,
                                      self.term_edges)]


def split_terminals(g: WeightedGraph) -> TerminalSplit:
    s, t = g.source, g.sink
    u, v = g.edge_u, g.edge_v
    u_term = (u == s) | (u == t)
    v_term = (v == s) | (v == t)
    st = u_term & v_term
    term = u_term ^ v_term
    nt = ~(u_term | v_term)
    term_idx = np.flatnonzero(term)
    tu, tv = u[term_idx], v[term_idx]
    endpoint = np.where(u_term[term_idx], tu, tv)
    node = np.where(u_term[term_idx], tv, tu)
    mask = np.ones(g.n, dtype=bool)
    mask[[s, t]] = False
    nodes = np.flatnonzero(mask)
    local = np.full(g.n, -1, dtype=np.int64)
    local[nodes] = np.arange(nodes.size)
    st_idx = np.flatnonzero(st)
    return TerminalSplit(
        nonterminal_nodes=nodes,
        local_index=local,
        nt_edges=np.flatnonzero(nt),
        term_edges=term_idx,
        term_node=node,
        term_to_source=endpoint == s,
        st_edges=st_idx,
        st_capacity=float(g.capacity[st_idx].sum()),
    )


def as_labeling(g: WeightedGraph, side) -> np.ndarray:
    """Coerce a labeling (array, or iterable of source-side node ids) to int8."""
    if isinstance(side, (set, frozenset)):
        lab = np.zeros(g.n, dtype=np.int8)
        lab[list(side)] = SOURCE_SIDE
        side = lab
    lab = np.asarray(side).astype(np.int8).ravel()
    if lab.shape != (g.n,):
        raise InvalidLabeling(f"labeling has length {lab.size}, expected {g.n}")
    if lab[g.source] != SOURCE_SIDE or lab[g.sink] != SINK_SIDE:
        raise InvalidLabeling("labeling must put s on side 1 and t on side 0")
    return lab


def cut_value(g: WeightedGraph, side) -> float:
    """Total capacity of edges crossing the labeling (1 = source side)."""
    lab = as_labeling(g, side)
    crossing = lab[g.edge_u] != lab[g.edge_v]
    return float(g.capacity[crossing].sum())
