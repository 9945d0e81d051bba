"""Turning a voltage vector into an s-t cut.

:func:`sweep_cut` scans prefix cuts of the voltage order.
:func:`two_level_round` clusters voltages into low / high groups, contracts
the confident nodes into the terminals and solves the much smaller
contracted problem exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateClustering, InputError, ZeroOptimum
from .graph import SINK_SIDE, SOURCE_SIDE, WeightedGraph, cut_value
from .maxflow import max_flow

logger = logging.getLogger(__name__)

SWEEP = "sweep"
TWO_LEVEL = "two_level"
CENTER_INIT = (0.1, 0.9)
THRESHOLD_OFFSET = 0.05
KMEANS_MAX_ROUNDS = 100


@dataclass(frozen=True)
class ThresholdPair:
    gamma0: float
    gamma1: float
    c0: float
    c1: float
    rounds: int = 0
    widened: bool = False
    """True when the offset rule gave ``gamma0 >= gamma1`` and the raw centers are used."""


@dataclass
class CutResult:
    labeling: np.ndarray
    cut_value: float
    method: str
    size_reduction: float | None = None
    coarse_nodes: int | None = None
    thresholds: ThresholdPair | None = None


@dataclass
class CoarsenedProblem:
    """Contracted graph; coarse node 0 is ``s_c``, node 1 is ``t_c``.

    ``node_map[v]`` is the coarse node of fine node ``v``; middle nodes keep
    their relative order.
    """

    graph: WeightedGraph
    node_map: np.ndarray
    high: np.ndarray
    low: np.ndarray
    thresholds: ThresholdPair

    @property
    def middle(self) -> np.ndarray:
        return np.flatnonzero(~(self.high | self.low))

    def lift(self, coarse_labeling) -> np.ndarray:
        return np.asarray(coarse_labeling, dtype=np.int8)[self.node_map]


def _check_voltages(g: WeightedGraph, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape != (g.n,):
        raise InputError(f"voltage vector has length {x.size}, graph has {g.n} nodes")
    if not np.all(np.isfinite(x)):
        raise InputError("voltage vector contains non-finite values")
    return x


def sweep_order(g: WeightedGraph, x) -> np.ndarray:
    """s first, t last, the rest by descending voltage with ties by node id."""
    x = _check_voltages(g, x)
    rest = np.setdiff1d(np.arange(g.n), [g.source, g.sink])
    rest = rest[np.lexsort((rest, -x[rest]))]
    return np.concatenate([[g.source], rest, [g.sink]]).astype(np.int64)


def prefix_cut_values(g: WeightedGraph, order) -> np.ndarray:
    """Cut value of every prefix ``order[:k]`` for ``k = 1..n-1``.

    An edge whose endpoints sit at positions ``a < b`` crosses exactly the
    prefixes ``a < k <= b``, so a difference array and one cumulative sum
    give all values in ``O(m + n)``.
    """
    pos = np.empty(g.n, dtype=np.int64)
    pos[order] = np.arange(g.n)
    a = np.minimum(pos[g.edge_u], pos[g.edge_v])
    b = np.maximum(pos[g.edge_u], pos[g.edge_v])
    diff = np.bincount(a + 1, weights=g.capacity, minlength=g.n + 1)
    diff -= np.bincount(b + 1, weights=g.capacity, minlength=g.n + 1)
    return np.cumsum(diff)[1:g.n]


def sweep_cut(g: WeightedGraph, x) -> CutResult:
    order = sweep_order(g, x)
    values = prefix_cut_values(g, order)
    k = int(np.argmin(values)) + 1
    lab = np.full(g.n, SINK_SIDE, dtype=np.int8)
    lab[order[:k]] = SOURCE_SIDE
    return CutResult(lab, cut_value(g, lab), SWEEP)


def cluster_voltages(x) -> ThresholdPair:
    """1-D Lloyd iteration with two centers started at 0.1 and 0.9.

    Runs until the assignment stops changing or for 100 rounds; a cluster
    that empties keeps its previous center.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size == 0 or np.ptp(x) == 0:
        raise DegenerateClustering("voltages are all identical")
    centers = np.array(CENTER_INIT, dtype=np.float64)
    assign = None
    rounds = 0
    for rounds in range(1, KMEANS_MAX_ROUNDS + 1):
        new = np.abs(x - centers[1]) < np.abs(x - centers[0])
        if assign is not None and np.array_equal(new, assign):
            rounds -= 1
            break
        assign = new
        for k, members in enumerate((~assign, assign)):
            if members.any():
                centers[k] = x[members].mean()
    c0, c1 = float(centers[0]), float(centers[1])
    g0, g1 = c0 + THRESHOLD_OFFSET, c1 - THRESHOLD_OFFSET
    widened = False
    if g0 >= g1:
        g0, g1, widened = c0, c1, True
    return ThresholdPair(g0, g1, c0, c1, rounds, widened)


def coarsen(g: WeightedGraph, x, thresholds: ThresholdPair) -> CoarsenedProblem:
    """Merge ``x >= gamma1`` into ``s_c`` and ``x <= gamma0`` into ``t_c``.

    Edges inside either group vanish; the others are re-attached to the
    group node and parallel copies summed, which realises the four weight
    rules (middle-middle, s_c-middle, t_c-middle, s_c-t_c).
    """
    x = _check_voltages(g, x)
    high = x >= thresholds.gamma1
    low = (x <= thresholds.gamma0) & ~high
    high[g.source], low[g.source] = True, False
    low[g.sink], high[g.sink] = True, False
    node_map = np.empty(g.n, dtype=np.int64)
    node_map[high] = 0
    node_map[low] = 1
    middle = np.flatnonzero(~(high | low))
    node_map[middle] = 2 + np.arange(middle.size)
    cu, cv = node_map[g.edge_u], node_map[g.edge_v]
    keep = cu != cv
    labels = tuple(["s_c", "t_c"] + [g.labels[v] if g.labels else int(v) for v in middle])
    coarse = WeightedGraph.from_arrays(2 + middle.size, cu[keep], cv[keep],
                                       g.capacity[keep], 0, 1, labels=labels,
                                       check_connected=False)
    return CoarsenedProblem(coarse, node_map, high, low, thresholds)


def two_level_round(g: WeightedGraph, x, size_cap: int | None = None) -> CutResult:
    """Cluster, contract, solve the contracted problem exactly and lift back.

    Falls back to :func:`sweep_cut` (with a warning) when the centers
    coincide or when the contracted graph has more than ``size_cap`` nodes.
    """
    x = _check_voltages(g, x)
    try:
        th = cluster_voltages(x)
    except DegenerateClustering as exc:
        logger.warning("%s; using sweep cut", exc)
        return sweep_cut(g, x)
    if th.gamma0 >= th.gamma1:
        logger.warning("cluster centers coincide (%g); using sweep cut", th.c0)
        return sweep_cut(g, x)
    prob = coarsen(g, x, th)
    nc = prob.graph.n
    if size_cap is not None and nc > size_cap:
        logger.warning("contracted graph has %d nodes > cap %d; using sweep cut",
                       nc, size_cap)
        return sweep_cut(g, x)
    _, coarse_lab = max_flow(prob.graph)
    lab = prob.lift(coarse_lab)
    return CutResult(lab, cut_value(g, lab), TWO_LEVEL, g.n / nc, nc, th)


def relative_approx_ratio(mu: float, mu_star: float) -> float:
    """``(mu - mu_star) / mu_star``."""
    if not mu_star > 0:
        raise ZeroOptimum(f"optimal value {mu_star!r} is not positive")
    return (float(mu) - float(mu_star)) / float(mu_star)
