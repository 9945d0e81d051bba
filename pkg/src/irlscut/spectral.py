"""Second eigenvalue of the terminal pencil and the Cheeger-type sandwich.

The pencil is ``(L, D)`` where ``D`` is zero except ``D_ss = D_tt = C`` with
``C`` twice the total edge weight.  ``D`` has rank 2, so only two
generalized eigenvalues are finite: 0 and ``lambda2``.  The latter equals
``min x'Lx / (2C)`` over ``x_s = 1, x_t = -1``, i.e. one Dirichlet solve.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .graph import WeightedGraph
from .irls import ReducedSystem
from .linalg import EXACT_LU, SERIAL, WorkerPool, factor_blocks, pcg_solve
from .maxflow import max_flow
from .partition import Partition

SANDWICH_RTOL = 1e-6


@dataclass(frozen=True)
class PencilSpec:
    laplacian: np.ndarray
    degree: np.ndarray
    C: float


def pencil(g: WeightedGraph) -> PencilSpec:
    """Dense ``(L, D, C)``; meant for small graphs and oracles."""
    C = 2.0 * g.total_capacity
    D = np.zeros((g.n, g.n))
    D[g.source, g.source] = D[g.sink, g.sink] = C
    return PencilSpec(g.laplacian().toarray(), D, C)


@dataclass(frozen=True)
class SpectralSolve:
    tol: float = 1e-12
    max_iter: int | None = None
    block_strategy: str = EXACT_LU


def dirichlet_potential(g: WeightedGraph, part: Partition | None = None,
                        config: SpectralSolve | None = None,
                        pool: WorkerPool = SERIAL):
    """Harmonic potential with ``g_s = 1``, ``g_t = -1`` and its PCG report.

    The right-hand side is the conductance to s minus the conductance to t
    at every non-terminal node.
    """
    cfg = config or SpectralSolve()
    system = ReducedSystem(g, part)
    x = np.zeros(g.n)
    x[g.source], x[g.sink] = 1.0, -1.0
    if system.size == 0:
        return x, None
    cond = system.system_conductance(g.capacity)
    L, _ = system.assemble(cond, pool)
    sp = system.split
    rows = system.row_of_node[sp.term_node]
    sign = np.where(sp.term_to_source, 1.0, -1.0)
    b = np.bincount(rows, weights=sign * cond[sp.term_edges], minlength=system.size)
    pre = factor_blocks(L, system.partition, cfg.block_strategy, pool)
    max_iter = cfg.max_iter if cfg.max_iter is not None else max(100, 10 * system.size)
    v, rep = pcg_solve(L, b, pre, None, cfg.tol, max_iter, pool)
    x[system.node_of_row] = v
    return x, rep


def lambda2(g: WeightedGraph, part: Partition | None = None,
            config: SpectralSolve | None = None, pool: WorkerPool = SERIAL) -> float:
    """``g'Lg / (2C)`` at the Dirichlet potential; every edge, s-t included."""
    x, _ = dirichlet_potential(g, part, config, pool)
    d = x[g.edge_u] - x[g.edge_v]
    energy = float(np.sum(g.capacity * d * d))
    return energy / (2.0 * (2.0 * g.total_capacity))


def pencil_eigenvalues(g: WeightedGraph, **kwargs) -> tuple[float, float]:
    """The two finite eigenvalues ``(lambda1, lambda2) = (0, lambda2)``."""
    return 0.0, lambda2(g, **kwargs)


def dense_pencil_eigenvalues(g: WeightedGraph) -> np.ndarray:
    """Finite generalized eigenvalues of ``(L, D)`` by a dense QZ solve."""
    from scipy.linalg import eig

    pen = pencil(g)
    ab = eig(pen.laplacian, pen.degree, right=False, homogeneous_eigvals=True)
    alpha, beta = ab[0], ab[1]
    scale = np.maximum(np.abs(alpha), np.abs(beta))
    finite = np.abs(beta) > 1e-9 * scale
    return np.sort((alpha[finite] / beta[finite]).real)


class CheegerReport(NamedTuple):
    lambda2: float
    phi: float
    holds: bool

    @property
    def lower(self) -> float:
        return 0.5 * self.phi ** 2

    @property
    def upper(self) -> float:
        return 2.0 * self.phi


def cheeger_check(g: WeightedGraph, config: SpectralSolve | None = None,
                  rtol: float = SANDWICH_RTOL) -> CheegerReport:
    """``lambda2``, the exact expansion ``phi = mincut / C`` and the sandwich test.

    Every s-t cut has exactly one terminal per side, so both volumes equal C.
    """
    lam = lambda2(g, config=config)
    mincut, _ = max_flow(g)
    phi = mincut / (2.0 * g.total_capacity)
    holds = (0.5 * phi * phi <= lam * (1 + rtol)) and (lam <= 2.0 * phi * (1 + rtol))
    return CheegerReport(lam, phi, bool(holds))
