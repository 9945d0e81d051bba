"""Iteratively reweighted least squares for the l1 form of s-t min-cut.

Each iteration recomputes edge weights ``w_i = sqrt((c_i dx_i)^2 + eps^2)``
from the current voltages and solves the reduced Laplacian system with
conductances ``c_i^2 / w_i`` for the non-terminal voltages, keeping
``x_s = 1`` and ``x_t = 0``.  A direct s-t edge adds the same amount to
every cut and is left out of the linear systems.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numba as nb
import numpy as np
from scipy import sparse

from .exceptions import InputError
from .graph import TerminalSplit, WeightedGraph, split_terminals
from .io import write_rows_csv
from .linalg import (EXACT_LU, SERIAL, PcgReport, SparseSymmetricMatrix,
                     WorkerPool, factor_blocks, pcg_solve)
from .partition import Partition

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["iteration", "S_eps", "flow_value", "pcg_iters",
                 "pcg_residual", "wall_ms"]


@dataclass
class IrlsConfig:
    eps: float = 1e-6
    T: int = 50
    pcg_tol: float = 1e-3
    pcg_max_iter: int = 50
    block_strategy: str = EXACT_LU
    warm_start: bool = True
    early_exit: bool = False
    early_exit_tol: float = 1e-8
    residual_norm: str = "preconditioned"

    def __post_init__(self):
        if not self.eps > 0 or not self.pcg_tol > 0:
            raise InputError("eps and pcg_tol must be positive")
        if self.T < 0 or self.pcg_max_iter < 0:
            raise InputError("T and pcg_max_iter must be non-negative")

    @property
    def box_tol(self) -> float:
        return 10.0 * self.pcg_tol


@dataclass
class ReweightState:
    weights: np.ndarray
    eps: float

    def conductance(self, g: WeightedGraph) -> np.ndarray:
        return g.capacity ** 2 / self.weights


@dataclass
class IrlsTrace:
    records: list = field(default_factory=list)
    block_ranges: tuple = ()
    iterates: list | None = None

    @property
    def iterations(self) -> int:
        return len(self.records) - 1

    def column(self, name):
        return [r[name] for r in self.records]

    def total_pcg_iterations(self, skip_initial=False) -> int:
        recs = self.records[1:] if skip_initial else self.records
        return sum(r["pcg_iters"] for r in recs)

    def to_csv(self, path, include_timing=True) -> None:
        cols = TRACE_COLUMNS if include_timing else TRACE_COLUMNS[:-1]
        write_rows_csv(self.records, path, cols)


# --------------------------------------------------------------------------
# pointwise formulas


def edge_differences(x, g: WeightedGraph) -> np.ndarray:
    """``(C B x)_i = c_i (x_u - x_v)`` for the stored orientation ``u < v``."""
    x = np.asarray(x, dtype=float)
    return g.capacity * (x[g.edge_u] - x[g.edge_v])


def reweight(x, g: WeightedGraph, eps: float) -> ReweightState:
    if not eps > 0:
        raise InputError("eps must be positive")
    d = edge_differences(x, g)
    return ReweightState(np.sqrt(d * d + eps * eps), float(eps))


def smoothed_objective(x, g: WeightedGraph, eps: float) -> float:
    """``sum_i sqrt((c_i dx_i)^2 + eps^2)`` over every edge of ``g``."""
    return float(reweight(x, g, eps).weights.sum())


def joint_objective(x, w, g: WeightedGraph, eps: float) -> float:
    """Smoothed joint objective ``1/2 sum((d_i^2 + eps^2)/w_i + w_i)``.

    Minimizing over ``w`` gives back :func:`smoothed_objective`; minimizing
    over ``x`` is the weighted least-squares step.
    """
    d = edge_differences(x, g)
    w = np.asarray(w, dtype=float)
    return float(0.5 * np.sum((d * d + eps * eps) / w + w))


def flow_value(x, g: WeightedGraph, conductance) -> float:
    """Energy ``x^T L x`` of the reweighted Laplacian, summed edge by edge."""
    x = np.asarray(x, dtype=float)
    dx = x[g.edge_u] - x[g.edge_v]
    return float(np.sum(np.asarray(conductance) * dx * dx))


def electrical_flow(x, g: WeightedGraph, conductance) -> np.ndarray:
    """Edge flow ``z = C W^-1 C B x`` along each stored orientation."""
    x = np.asarray(x, dtype=float)
    return np.asarray(conductance) * (x[g.edge_u] - x[g.edge_v])


def net_outflow(z, g: WeightedGraph) -> np.ndarray:
    """``B^T z``: net flow leaving each node."""
    return g.incidence.rmatvec(z)


# --------------------------------------------------------------------------
# reduced system


@nb.njit(nogil=True, cache=True)
def _assemble_rows(indptr, slot_edge, diag_slot, term_ptr, term_edge,
                   term_to_s, cond, data, b, lo, hi):
    for i in range(lo, hi):
        d = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            e = slot_edge[k]
            if e >= 0:
                gk = cond[e]
                data[k] = -gk
                d += gk
        bi = 0.0
        for k in range(term_ptr[i], term_ptr[i + 1]):
            gk = cond[term_edge[k]]
            d += gk
            if term_to_s[k]:
                bi += gk
        data[diag_slot[i]] = d
        b[i] = bi


@nb.njit(nogil=True, cache=True)
def _edge_residual(indptr, indices, data, diag_slot, term_ptr, term_edge,
                   term_to_s, cond, v, out, lo, hi):
    # sum of g (x_j - x_i) over incident edges; no large diagonal term cancels
    for i in range(lo, hi):
        xi = v[i]
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            if k != diag_slot[i]:
                acc -= data[k] * (v[indices[k]] - xi)
        for k in range(term_ptr[i], term_ptr[i + 1]):
            target = 1.0 if term_to_s[k] else 0.0
            acc += cond[term_edge[k]] * (target - xi)
        out[i] = acc


class ReducedSystem:
    """Reduced Laplacian ``L~ v = b`` in partition order with a fixed pattern.

    Row ``i`` corresponds to graph node ``node_of_row[i]``.  The matrix and
    right-hand side are overwritten in place by :meth:`assemble`.
    """

    def __init__(self, g: WeightedGraph, part: Partition | None = None,
                 split: TerminalSplit | None = None):
        self.graph = g
        self.split = split or split_terminals(g)
        sp = self.split
        nt = sp.nt_count
        if part is None:
            part = Partition.from_assignment(np.zeros(nt, dtype=np.int64), 1)
        if part.size != nt:
            raise InputError(f"partition covers {part.size} nodes, graph has {nt} non-terminals")
        self.partition = part
        self.node_of_row = sp.nonterminal_nodes[part.order]
        row_of_node = np.full(g.n, -1, dtype=np.int64)
        row_of_node[self.node_of_row] = np.arange(nt)
        self.row_of_node = row_of_node

        e = sp.nt_edges
        ru, rv = row_of_node[g.edge_u[e]], row_of_node[g.edge_v[e]]
        k = e.size
        rows = np.concatenate([ru, rv, np.arange(nt)])
        cols = np.concatenate([rv, ru, np.arange(nt)])
        ids = np.arange(1, 2 * k + nt + 1, dtype=np.float64)
        A = sparse.csr_matrix((ids, (rows, cols)), shape=(nt, nt))
        A.sort_indices()
        entry = A.data.astype(np.int64) - 1
        slot_edge = np.full(entry.size, -1, dtype=np.int64)
        off = entry < 2 * k
        slot_edge[off] = e[entry[off] % k] if k else slot_edge[off]
        self._slot_edge = slot_edge
        diag_slot = np.empty(nt, dtype=np.int64)
        diag_slot[entry[~off] - 2 * k] = np.flatnonzero(~off)
        self._diag_slot = diag_slot
        self.matrix = SparseSymmetricMatrix(A.indptr, A.indices,
                                            np.zeros(A.nnz), part.block_ranges)

        trow = row_of_node[sp.term_node]
        order = np.argsort(trow, kind="stable")
        self._term_edge = sp.term_edges[order]
        self._term_to_s = sp.term_to_source[order]
        self._term_ptr = np.zeros(nt + 1, dtype=np.int64)
        np.cumsum(np.bincount(trow, minlength=nt), out=self._term_ptr[1:])
        self.rhs = np.zeros(nt)
        self._cond = np.zeros(g.m)

    @property
    def size(self) -> int:
        return self.matrix.n

    def system_conductance(self, cond) -> np.ndarray:
        """Copy of ``cond`` with direct s-t edges zeroed (they are not in the system)."""
        out = np.array(cond, dtype=float)
        out[self.split.st_edges] = 0.0
        return out

    def assemble(self, cond, pool: WorkerPool = SERIAL):
        cond = np.ascontiguousarray(cond, dtype=np.float64)
        self._cond = cond
        M = self.matrix
        st = M.starts
        args = (M.indptr, self._slot_edge, self._diag_slot, self._term_ptr,
                self._term_edge, self._term_to_s, cond, M.data, self.rhs)
        groups = pool.chunks(st.size - 1)
        if len(groups) <= 1:
            _assemble_rows(*args, 0, M.n)
        else:
            pool.run(lambda gr: _assemble_rows(*args, st[gr.start], st[gr.stop]), groups)
        return M, self.rhs

    def residual(self, v, out=None, pool: WorkerPool = SERIAL) -> np.ndarray:
        """``b - L~ v`` for the last assembly, summed edge by edge.

        Agrees with ``rhs - matrix @ v`` in exact arithmetic but avoids the
        cancellation between the diagonal and its neighbours, which loses
        about ``log10(max conductance)`` digits once weights approach eps.
        """
        M = self.matrix
        v = np.ascontiguousarray(v, dtype=np.float64)
        out = np.empty(M.n) if out is None else out
        args = (M.indptr, M.indices, M.data, self._diag_slot, self._term_ptr,
                self._term_edge, self._term_to_s, self._cond, v, out)
        st = M.starts
        groups = pool.chunks(st.size - 1)
        if len(groups) <= 1:
            _edge_residual(*args, 0, M.n)
        else:
            pool.run(lambda gr: _edge_residual(*args, st[gr.start], st[gr.stop]), groups)
        return out

    def embed(self, v) -> np.ndarray:
        """Full voltage vector with ``x_s = 1``, ``x_t = 0``."""
        x = np.zeros(self.graph.n)
        x[self.graph.source] = 1.0
        x[self.node_of_row] = v
        return x

    def restrict(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float)[self.node_of_row]


def assemble_reduced_system(g: WeightedGraph, weights: ReweightState | None = None,
                            part: Partition | None = None):
    """Convenience wrapper returning ``(system, L~, b)``.

    ``weights=None`` means the initial choice ``W = C`` (conductance = c).
    """
    system = ReducedSystem(g, part)
    cond = g.capacity if weights is None else weights.conductance(g)
    L, b = system.assemble(cond)
    return system, L, b


# --------------------------------------------------------------------------


def irls_run(g: WeightedGraph, part: Partition | None = None,
             config: IrlsConfig | None = None, pool: WorkerPool = SERIAL,
             keep_iterates: bool = False, callback=None):
    """Run the initialization solve plus up to ``T`` reweighting iterations.

    ``callback(l, x, conductance, report)`` is invoked after every solve with
    the conductances that produced ``x``.  Returns ``(x, trace)``.
    """
    cfg = config or IrlsConfig()
    system = ReducedSystem(g, part)
    trace = IrlsTrace(block_ranges=tuple(system.partition.block_ranges.tolist()),
                      iterates=[] if keep_iterates else None)
    if system.size == 0:
        x = system.embed(np.zeros(0))
        cond = system.system_conductance(g.capacity)
        _record(trace, 0, x, g, cfg, cond, PcgReport(0, 0.0, True, [0.0]), 0.0)
        if callback:
            callback(0, x, cond, trace.records[-1])
        return x, trace

    t0 = time.perf_counter()
    cond = system.system_conductance(g.capacity)
    L, b = system.assemble(cond, pool)
    pre = factor_blocks(L, system.partition, cfg.block_strategy, pool)
    v, rep = pcg_solve(L, b, pre, None, cfg.pcg_tol, cfg.pcg_max_iter, pool,
                       cfg.residual_norm, system.residual)
    x = system.embed(v)
    _record(trace, 0, x, g, cfg, cond, rep, time.perf_counter() - t0)
    if callback:
        callback(0, x, cond, rep)

    for it in range(1, cfg.T + 1):
        t0 = time.perf_counter()
        cond = system.system_conductance(reweight(x, g, cfg.eps).conductance(g))
        system.assemble(cond, pool)
        pre.refresh_values(L, pool)
        v, rep = pcg_solve(L, b, pre, v if cfg.warm_start else None,
                           cfg.pcg_tol, cfg.pcg_max_iter, pool, cfg.residual_norm,
                           system.residual)
        x_new = system.embed(v)
        _record(trace, it, x_new, g, cfg, cond, rep, time.perf_counter() - t0)
        if callback:
            callback(it, x_new, cond, rep)
        step = float(np.max(np.abs(x_new - x)))
        x = x_new
        if cfg.early_exit and step < cfg.early_exit_tol:
            break
    return x, trace


def _record(trace, it, x, g, cfg, cond, rep, seconds):
    lo, hi = float(x.min()), float(x.max())
    if lo < -cfg.box_tol or hi > 1.0 + cfg.box_tol:
        logger.warning("iterate %d leaves [0, 1] beyond %.1e: range [%g, %g]; "
                       "PCG accuracy is insufficient", it, cfg.box_tol, lo, hi)
    trace.records.append({
        "iteration": it,
        "S_eps": smoothed_objective(x, g, cfg.eps),
        "flow_value": flow_value(x, g, cond),
        "pcg_iters": int(rep.iterations),
        "pcg_residual": float(rep.relative_residual),
        "pcg_converged": bool(rep.converged),
        "wall_ms": 1e3 * seconds,
    })
    if trace.iterates is not None:
        trace.iterates.append(x.copy())


def polarization(x, margin: float = 0.05) -> float:
    """Fraction of voltages within ``margin`` of 0 or 1."""
    x = np.asarray(x, dtype=float)
    return float(np.mean((x <= margin) | (x >= 1.0 - margin)))
