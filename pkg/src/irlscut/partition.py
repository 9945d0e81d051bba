"""k-way partitioning of the non-terminal graph for block-Jacobi blocks.

Multilevel recursive bisection: heavy-edge matching to coarsen, greedy
region growing on the coarsest graph, boundary Fiduccia-Mattheyses passes on
the way back up, and a final k-way pass that enforces the block-size bound.
Everything is deterministic for a fixed ``seed``.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numba as nb
import numpy as np
from scipy import sparse

from .exceptions import BlockCountExceedsNodes, DimensionMismatch, InputError

COARSEST_SIZE = 60
INIT_TRIES = 4


@dataclass(frozen=True, eq=False)
class Partition:
    """Block assignment plus the induced contiguous reordering.

    ``order[k]`` is the local node placed at position ``k``; ``position`` is
    its inverse.  Block ``j`` occupies positions
    ``block_ranges[j]:block_ranges[j + 1]``.
    """

    assignment: np.ndarray
    order: np.ndarray
    position: np.ndarray
    block_ranges: np.ndarray

    @property
    def block_count(self) -> int:
        return int(self.block_ranges.size - 1)

    @property
    def size(self) -> int:
        return int(self.assignment.size)

    def ranges(self) -> list[tuple[int, int]]:
        br = self.block_ranges
        return [(int(br[j]), int(br[j + 1])) for j in range(self.block_count)]

    def block_sizes(self) -> np.ndarray:
        return np.diff(self.block_ranges)

    def permute(self, vec) -> np.ndarray:
        """Original ordering -> partition ordering."""
        return np.asarray(vec)[self.order]

    def unpermute(self, vec) -> np.ndarray:
        """Partition ordering -> original ordering."""
        return np.asarray(vec)[self.position]

    @classmethod
    def from_assignment(cls, assignment, block_count=None) -> "Partition":
        a = np.asarray(assignment, dtype=np.int64).ravel()
        if a.size and a.min() < 0:
            raise InputError("negative block id")
        p = int(block_count if block_count is not None else (a.max() + 1 if a.size else 1))
        if a.size and a.max() >= p:
            raise InputError("block id exceeds block count")
        order = np.argsort(a, kind="stable")
        position = np.empty_like(order)
        position[order] = np.arange(a.size)
        ranges = np.zeros(p + 1, dtype=np.int64)
        np.cumsum(np.bincount(a, minlength=p), out=ranges[1:])
        return cls(a, order, position, ranges)


def balance_bound(n: int, p: int, tolerance: float) -> int:
    """Largest admissible block size: ``(1+tol) n/p``, but never below ``ceil(n/p)``."""
    return max(int(math.floor((1.0 + tolerance) * n / p + 1e-9)), -(-n // p))


def edge_cut(assignment, u, v, c) -> float:
    a = np.asarray(assignment)
    return float(np.asarray(c)[a[u] != a[v]].sum())


def block_nnz(part: Partition, u, v) -> np.ndarray:
    """Nonzeros of each diagonal block of the reordered reduced Laplacian."""
    a = part.assignment
    inside = a[u] == a[v]
    return np.bincount(a, minlength=part.block_count) + 2 * np.bincount(
        a[u][inside], minlength=part.block_count)


# --------------------------------------------------------------------------
# numba kernels


@nb.njit(cache=True)
def _heavy_edge_matching(indptr, indices, wts, vwgt, visit_order, max_vwgt):
    n = indptr.size - 1
    match = np.full(n, -1, dtype=np.int64)
    for u in visit_order:
        if match[u] >= 0:
            continue
        best = -1
        best_w = -1.0
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if v == u or match[v] >= 0 or vwgt[u] + vwgt[v] > max_vwgt:
                continue
            w = wts[k]
            if w > best_w or (w == best_w and v < best):
                best, best_w = v, w
        if best < 0:
            match[u] = u
        else:
            match[u] = best
            match[best] = u
    return match


@nb.njit(cache=True)
def _gains(indptr, indices, wts, side):
    n = indptr.size - 1
    gain = np.zeros(n)
    boundary = np.zeros(n, dtype=np.bool_)
    for u in range(n):
        g = 0.0
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if v == u:
                continue
            if side[v] != side[u]:
                g += wts[k]
                boundary[u] = True
            else:
                g -= wts[k]
        gain[u] = g
    return gain, boundary


@nb.njit(cache=True)
def _rebalance(indptr, indices, wts, vwgt, side, weight, maxw):
    """Move highest-gain nodes off any overweight side until within bounds."""
    n = side.size
    for a in range(2):
        b = 1 - a
        while weight[a] > maxw[a]:
            gain, _ = _gains(indptr, indices, wts, side)
            best = -1
            for u in range(n):
                if side[u] != a or weight[b] + vwgt[u] > maxw[b]:
                    continue
                if best < 0 or gain[u] > gain[best]:
                    best = u
            if best < 0:
                break
            side[best] = b
            weight[a] -= vwgt[best]
            weight[b] += vwgt[best]


@nb.njit(cache=True)
def _fm_refine(indptr, indices, wts, vwgt, side, maxw, max_passes, stall_limit):
    n = side.size
    weight = np.zeros(2, dtype=np.int64)
    for u in range(n):
        weight[side[u]] += vwgt[u]
    _rebalance(indptr, indices, wts, vwgt, side, weight, maxw)
    moves = np.empty(n, dtype=np.int64)
    for _ in range(max_passes):
        gain, boundary = _gains(indptr, indices, wts, side)
        locked = np.zeros(n, dtype=np.bool_)
        heap = [(0.0, np.int64(0))]
        heap.pop()
        for u in range(n):
            if boundary[u]:
                heapq.heappush(heap, (-gain[u], np.int64(u)))
        nmoves = 0
        cum = 0.0
        best = 0.0
        best_idx = 0
        stall = 0
        while len(heap) > 0:
            neg, u = heapq.heappop(heap)
            if locked[u] or -neg != gain[u]:
                continue
            a = side[u]
            b = 1 - a
            if weight[b] + vwgt[u] > maxw[b]:
                continue
            side[u] = b
            weight[a] -= vwgt[u]
            weight[b] += vwgt[u]
            locked[u] = True
            cum -= gain[u]
            moves[nmoves] = u
            nmoves += 1
            gain[u] = -gain[u]
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if v == u:
                    continue
                if side[v] == b:
                    gain[v] -= 2.0 * wts[k]
                else:
                    gain[v] += 2.0 * wts[k]
                if not locked[v]:
                    heapq.heappush(heap, (-gain[v], np.int64(v)))
            if cum < best - 1e-12 * (1.0 + abs(best)):
                best = cum
                best_idx = nmoves
                stall = 0
            else:
                stall += 1
                if stall > stall_limit:
                    break
        for i in range(nmoves - 1, best_idx - 1, -1):
            u = moves[i]
            a = side[u]
            side[u] = 1 - a
            weight[a] -= vwgt[u]
            weight[1 - a] += vwgt[u]
        if best_idx == 0:
            break
    return side


@nb.njit(cache=True)
def _grow_region(indptr, indices, wts, vwgt, seed_order, target0):
    """Greedy graph growing: side 0 grows from a seed by strongest connection."""
    n = indptr.size - 1
    side = np.ones(n, dtype=np.int64)
    conn = np.zeros(n)
    weight0 = 0
    heap = [(0.0, np.int64(0))]
    heap.pop()
    cursor = 0
    while weight0 < target0:
        u = -1
        while len(heap) > 0:
            neg, cand = heapq.heappop(heap)
            if side[cand] == 1 and -neg == conn[cand]:
                u = cand
                break
        if u < 0:
            while cursor < n and side[seed_order[cursor]] == 0:
                cursor += 1
            if cursor >= n:
                break
            u = seed_order[cursor]
        side[u] = 0
        weight0 += vwgt[u]
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if side[v] == 1:
                conn[v] += wts[k]
                heapq.heappush(heap, (-conn[v], np.int64(v)))
    return side


# --------------------------------------------------------------------------


def _csr(n, u, v, c) -> sparse.csr_matrix:
    A = sparse.csr_matrix(
        (np.concatenate([c, c]), (np.concatenate([u, v]), np.concatenate([v, u]))),
        shape=(n, n))
    A.sum_duplicates()
    A.sort_indices()
    return A


def _contract(A, vwgt, match):
    n = A.shape[0]
    leader = np.minimum(np.arange(n), match)
    _, cmap = np.unique(leader, return_inverse=True)
    nc = int(cmap.max()) + 1
    coo = A.tocoo()
    Ac = sparse.csr_matrix((coo.data, (cmap[coo.row], cmap[coo.col])), shape=(nc, nc))
    Ac.setdiag(0)
    Ac.eliminate_zeros()
    Ac.sort_indices()
    vc = np.bincount(cmap, weights=vwgt, minlength=nc).astype(np.int64)
    return Ac, vc, cmap


def _cut_of(A, side) -> float:
    coo = A.tocoo()
    return 0.5 * float(coo.data[side[coo.row] != side[coo.col]].sum())


def _bisect(A, vwgt, target0, maxw, rng):
    """Multilevel bisection; returns side (0/1) per node."""
    levels = []
    cur, cw = A, vwgt
    total = int(vwgt.sum())
    max_vwgt = max(1, int(1.5 * total / COARSEST_SIZE))
    while cur.shape[0] > COARSEST_SIZE:
        visit = rng.permutation(cur.shape[0]).astype(np.int64)
        match = _heavy_edge_matching(cur.indptr, cur.indices, cur.data, cw, visit, max_vwgt)
        nxt, nw, cmap = _contract(cur, cw, match)
        if nxt.shape[0] > 0.9 * cur.shape[0]:
            break
        levels.append((cur, cw, cmap))
        cur, cw = nxt, nw

    best_side, best_cut = None, np.inf
    for _ in range(INIT_TRIES):
        seeds = rng.permutation(cur.shape[0]).astype(np.int64)
        side = _grow_region(cur.indptr, cur.indices, cur.data, cw, seeds, target0)
        side = _fm_refine(cur.indptr, cur.indices, cur.data, cw, side, maxw, 8, 50)
        w0 = int(cw[side == 0].sum())
        feasible = w0 <= maxw[0] and total - w0 <= maxw[1]
        cut = _cut_of(cur, side) + (0.0 if feasible else 1e300)
        if cut < best_cut:
            best_side, best_cut = side, cut
    side = best_side
    for fine, fw, cmap in reversed(levels):
        side = side[cmap].copy()
        side = _fm_refine(fine.indptr, fine.indices, fine.data, fw, side, maxw, 8, 100)
    return side


def _kway_balance(A, assignment, p, bound):
    """Move boundary-preferring nodes out of blocks larger than ``bound``."""
    sizes = np.bincount(assignment, minlength=p)
    indptr, indices, data = A.indptr, A.indices, A.data
    while sizes.max() > bound:
        src = int(np.argmax(sizes))
        best = None
        for u in np.flatnonzero(assignment == src):
            conn = np.zeros(p)
            sl = slice(indptr[u], indptr[u + 1])
            np.add.at(conn, assignment[indices[sl]], data[sl])
            internal = conn[src]
            conn[src] = -np.inf
            conn[sizes >= bound] = -np.inf
            dst = int(np.argmax(conn))
            if not np.isfinite(conn[dst]):
                room = np.flatnonzero(sizes < bound)
                dst, conn[dst] = int(room[0]), 0.0
            loss = internal - conn[dst]
            if best is None or loss < best[0]:
                best = (loss, int(u), dst)
        _, u, dst = best
        assignment[u] = dst
        sizes[src] -= 1
        sizes[dst] += 1
    return assignment


def partition(n: int, u, v, c, p: int, balance_tolerance: float = 0.05,
              seed: int = 0) -> Partition:
    """Partition a graph on ``n`` nodes into ``p`` blocks.

    Edges are given as local endpoint arrays ``u, v`` with capacities ``c``.
    The graph may be disconnected.  Blocks respect
    :func:`balance_bound` on node counts; the weighted edge cut is reduced
    heuristically.
    """
    p = int(p)
    if p < 1:
        raise InputError("block count must be >= 1")
    if p > max(n, 1):
        raise BlockCountExceedsNodes(f"{p} blocks requested for {n} nodes")
    assignment = np.zeros(n, dtype=np.int64)
    if p == 1 or n == 0:
        return Partition.from_assignment(assignment, p)
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    c = np.asarray(c, dtype=np.float64)
    A = _csr(n, u, v, c)
    rng = np.random.default_rng(seed)
    depth = max(1, math.ceil(math.log2(p)))
    level_tol = (1.0 + balance_tolerance) ** (1.0 / depth) - 1.0

    stack = [(np.arange(n), p, 0)]
    while stack:
        nodes, k, first = stack.pop()
        if k == 1:
            assignment[nodes] = first
            continue
        k0 = (k + 1) // 2
        k1 = k - k0
        size = nodes.size
        exact0 = size * k0 / k
        target0 = int(round(exact0))
        max0 = max(target0, int(math.floor(exact0 * (1 + level_tol))))
        max1 = max(size - target0, int(math.floor((size - exact0) * (1 + level_tol))))
        max0 = min(max0, size - k1)
        max1 = min(max1, size - k0)
        sub = A[nodes][:, nodes].tocsr()
        sub.sort_indices()
        side = _bisect(sub, np.ones(size, dtype=np.int64), target0,
                       np.array([max0, max1], dtype=np.int64), rng)
        stack.append((nodes[side == 1], k1, first + k0))
        stack.append((nodes[side == 0], k0, first))

    assignment = _kway_balance(A, assignment, p, balance_bound(n, p, balance_tolerance))
    return Partition.from_assignment(assignment, p)


def apply_permutation(matrix, rhs, part: Partition):
    """Reorder a system so that every block is a contiguous index range.

    Returns ``(P A P^T, P b)``.  Map a solution back with
    :meth:`Partition.unpermute`.
    """
    n = matrix.shape[0]
    if matrix.shape != (n, n) or n != part.size or np.shape(rhs) != (n,):
        raise DimensionMismatch(
            f"system of size {matrix.shape}/{np.shape(rhs)} vs partition of {part.size}")
    o = part.order
    if sparse.issparse(matrix):
        pm = sparse.csr_matrix(matrix)[o][:, o].tocsr()
        pm.sort_indices()
    else:
        pm = np.asarray(matrix)[np.ix_(o, o)]
    return pm, np.asarray(rhs)[o]
