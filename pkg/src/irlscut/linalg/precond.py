"""Block-Jacobi preconditioning with exact or ILU(0) block factorizations.

The symbolic part of every block (entry extraction, fill-reducing ordering
for sparse LU, ILU(0) pattern) is computed once in :func:`factor_blocks`;
:meth:`BlockJacobiPreconditioner.refresh_values` only redoes the numbers.
"""
from __future__ import annotations

import logging

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from ..exceptions import (InputError, PatternChanged,
                          PreconditionerDimensionMismatch, ZeroPivot)
from .kernels import (ilu0_factor, ldlt_factor, ldlt_solve, lu_csr_solve,
                      triangular_pair_solve)
from .matrix import SERIAL, SparseSymmetricMatrix, WorkerPool

logger = logging.getLogger(__name__)

EXACT_LU = "exact_lu"
ILU0 = "ilu0"
STRATEGIES = (EXACT_LU, ILU0)
DENSE_MAX = 64
PIVOT_RTOL = 1e-14


class _Block:
    """One diagonal block: its entries' slots in the parent matrix plus factors."""

    def __init__(self, lo, hi, slots, indptr, indices):
        self.lo, self.hi = lo, hi
        self.slots = slots
        self.indptr = indptr
        self.indices = indices
        self.kind = None
        self.factor = None
        self._perm = None
        self._perm_slots = None
        self._perm_pattern = None
        self._dense_rc = None
        self._diag = None

    @property
    def size(self):
        return self.hi - self.lo

    # -- symbolic setup ---------------------------------------------------
    def setup(self, strategy, values):
        if strategy == ILU0:
            rows = np.repeat(np.arange(self.size), np.diff(self.indptr))
            self._diag = np.flatnonzero(rows == self.indices)
            if self._diag.size == self.size:
                self.kind = ILU0
                try:
                    self._factor_ilu0(values)
                    return
                except ZeroPivot as exc:
                    logger.warning("block [%d, %d): %s; using exact LU",
                                   self.lo, self.hi, exc)
            self.factor = None
        self._setup_exact(values)

    def _setup_exact(self, values):
        rows = np.repeat(np.arange(self.size), np.diff(self.indptr))
        if self.size <= DENSE_MAX:
            self.kind = "dense_ldlt"
            self._dense_rc = (rows, self.indices)
        else:
            self.kind = "sparse_lu"
            B = sparse.csc_matrix((values, self.indices, self.indptr),
                                  shape=(self.size, self.size))
            first = splu(B, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                         options=dict(SymmetricMode=True))
            # perm_c[i] is the new position of column i; we need new -> old
            perm = np.argsort(first.perm_c).astype(np.int64)
            ids = sparse.csr_matrix(
                (np.arange(1, values.size + 1, dtype=np.float64), self.indices,
                 self.indptr), shape=(self.size, self.size))
            P = ids[perm][:, perm].tocsr()
            P.sort_indices()
            self._perm = perm
            self._perm_slots = P.data.astype(np.int64) - 1
            self._perm_pattern = (P.indices.copy(), P.indptr.copy())
        self.refactor(values)

    # -- numeric ----------------------------------------------------------
    def _factor_ilu0(self, values):
        lu, bad = ilu0_factor(self.indptr, self.indices, values, self._diag, PIVOT_RTOL)
        if bad >= 0:
            raise ZeroPivot(f"ILU(0) pivot underflow at local row {bad}")
        self.factor = lu

    def refactor(self, values):
        if self.kind == ILU0:
            try:
                self._factor_ilu0(values)
                return
            except ZeroPivot as exc:
                logger.warning("block [%d, %d): %s; switching to exact LU",
                               self.lo, self.hi, exc)
                self._setup_exact(values)
                return
        if self.kind == "dense_ldlt":
            D = np.zeros((self.size, self.size))
            D[self._dense_rc] = values
            self.factor = ldlt_factor(D)
        else:
            idx, ptr = self._perm_pattern
            B = sparse.csc_matrix((values[self._perm_slots], idx, ptr),
                                  shape=(self.size, self.size))
            lu = splu(B, permc_spec="NATURAL", diag_pivot_thresh=0.0,
                      options=dict(SymmetricMode=True))
            L, U = lu.L.tocsr(), lu.U.tocsr()
            self.factor = (
                L.indptr.astype(np.int64), L.indices.astype(np.int64), L.data,
                U.indptr.astype(np.int64), U.indices.astype(np.int64), U.data,
                lu.perm_r.astype(np.int64), lu.perm_c.astype(np.int64))

    def solve(self, r, out):
        if self.kind == ILU0:
            lu_csr_solve(self.indptr, self.indices, self.factor, self._diag, r, out)
        elif self.kind == "dense_ldlt":
            L, d = self.factor
            ldlt_solve(L, d, r, out)
        else:
            lp, li, lv, up, ui, uv, perm_r, perm_c = self.factor
            y = np.empty(self.size)
            y[perm_r] = r[self._perm]
            w = np.empty(self.size)
            triangular_pair_solve(lp, li, lv, up, ui, uv, y, w)
            out[self._perm] = w[perm_c]


class BlockJacobiPreconditioner:
    """Block-diagonal approximation ``M = diag(M_1, ..., M_p)`` of a matrix.

    ``block_kinds`` reports how each block is handled: ``ilu0``,
    ``dense_ldlt`` (exact, small blocks) or ``sparse_lu`` (exact).
    """

    def __init__(self, matrix: SparseSymmetricMatrix, starts, strategy: str):
        if strategy not in STRATEGIES:
            raise InputError(f"unknown block strategy {strategy!r}")
        starts = np.asarray(starts, dtype=np.int64)
        n = matrix.n
        if starts[0] != 0 or starts[-1] != n or np.any(np.diff(starts) < 0):
            raise PreconditionerDimensionMismatch("block ranges must tile 0..n")
        self.n = n
        self.starts = starts
        self.strategy = strategy
        self._indptr = matrix.indptr
        self._indices = matrix.indices
        self.blocks = self._extract(matrix)

    def _extract(self, A):
        rows = np.repeat(np.arange(A.n), np.diff(A.indptr))
        bid_row = np.searchsorted(self.starts, rows, side="right") - 1
        bid_col = np.searchsorted(self.starts, A.indices, side="right") - 1
        inside = np.flatnonzero(bid_row == bid_col)
        cuts = np.searchsorted(bid_row[inside], np.arange(self.starts.size))
        blocks = []
        for j in range(self.starts.size - 1):
            lo, hi = int(self.starts[j]), int(self.starts[j + 1])
            slots = inside[cuts[j]:cuts[j + 1]]
            indptr = np.zeros(hi - lo + 1, dtype=np.int64)
            np.cumsum(np.bincount(rows[slots] - lo, minlength=hi - lo), out=indptr[1:])
            blocks.append(_Block(lo, hi, slots, indptr, A.indices[slots] - lo))
        return blocks

    @property
    def block_kinds(self) -> list[str]:
        return [b.kind for b in self.blocks]

    def ranges(self):
        return [(b.lo, b.hi) for b in self.blocks]

    def _check(self, matrix):
        if matrix.n != self.n:
            raise PreconditionerDimensionMismatch(
                f"matrix of size {matrix.n}, preconditioner of size {self.n}")
        if not (matrix.indptr is self._indptr and matrix.indices is self._indices):
            if not (np.array_equal(matrix.indptr, self._indptr)
                    and np.array_equal(matrix.indices, self._indices)):
                raise PatternChanged("matrix pattern differs from the factored one")

    def refresh_values(self, matrix: SparseSymmetricMatrix,
                       pool: WorkerPool = SERIAL) -> None:
        """Numeric refactorization with the new values of ``matrix``."""
        self._check(matrix)
        data = matrix.data
        blocks = self.blocks

        def work(group):
            for j in group:
                blocks[j].refactor(data[blocks[j].slots])

        pool.run(work, pool.chunks(len(blocks)))

    def apply(self, r, out=None, pool: WorkerPool = SERIAL) -> np.ndarray:
        r = np.ascontiguousarray(r, dtype=np.float64)
        if r.shape != (self.n,):
            raise PreconditionerDimensionMismatch(
                f"vector of length {r.shape} for preconditioner of size {self.n}")
        out = np.empty(self.n) if out is None else out
        blocks = self.blocks

        def work(group):
            for j in group:
                b = blocks[j]
                if b.size:
                    b.solve(r[b.lo:b.hi], out[b.lo:b.hi])

        pool.run(work, pool.chunks(len(blocks)))
        return out


def factor_blocks(matrix: SparseSymmetricMatrix, ranges, strategy: str = EXACT_LU,
                  pool: WorkerPool = SERIAL) -> BlockJacobiPreconditioner:
    """Factor every diagonal block of ``matrix``.

    ``ranges`` is either a block-start array (length ``p+1``) or an object
    with a ``block_ranges`` attribute such as a partition.
    """
    starts = getattr(ranges, "block_ranges", ranges)
    pre = BlockJacobiPreconditioner(matrix, starts, strategy)
    data = matrix.data
    blocks = pre.blocks

    def work(group):
        for j in group:
            blocks[j].setup(strategy, data[blocks[j].slots])

    pool.run(work, pool.chunks(len(blocks)))
    return pre
