"""Fixed-pattern symmetric CSR matrices and the worker pool that drives them."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import sparse

from ..exceptions import DimensionMismatch, InputError, PatternChanged
from .kernels import block_dot, csr_matvec_rows


class WorkerPool:
    """Thin wrapper over a thread pool; ``workers <= 1`` runs tasks inline.

    Tasks must write to disjoint outputs.  Results never depend on the
    worker count because no reduction crosses task boundaries.
    """

    def __init__(self, workers: int = 1):
        self.workers = max(1, int(workers))
        self._executor = (ThreadPoolExecutor(self.workers)
                          if self.workers > 1 else None)

    def run(self, fn, items):
        items = list(items)
        if self._executor is None or len(items) <= 1:
            return [fn(it) for it in items]
        return list(self._executor.map(fn, items))

    def chunks(self, count: int) -> list[range]:
        """Split ``range(count)`` into at most ``workers`` contiguous groups."""
        k = min(self.workers, max(count, 1))
        edges = np.linspace(0, count, k + 1).round().astype(int)
        return [range(edges[i], edges[i + 1]) for i in range(k) if edges[i] < edges[i + 1]]

    def close(self):
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


SERIAL = WorkerPool(1)


class SparseSymmetricMatrix:
    """Symmetric matrix in CSR form whose sparsity pattern never changes.

    Only ``data`` is mutable (through :meth:`update_values`).  Row ranges in
    ``starts`` give the block-row distribution used for parallel products
    and deterministic reductions.
    """

    def __init__(self, indptr, indices, data, starts=None):
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.data = np.ascontiguousarray(data, dtype=np.float64).copy()
        n = self.indptr.size - 1
        if self.indices.size != self.data.size or self.indptr[-1] != self.data.size:
            raise InputError("inconsistent CSR arrays")
        within_row = np.ones(max(self.indices.size - 1, 0), dtype=bool)
        inner = self.indptr[1:-1]
        within_row[inner[(inner > 0) & (inner < self.indices.size)] - 1] = False
        if np.any(np.diff(self.indices)[within_row] <= 0):
            raise InputError("CSR column indices must be sorted and unique")
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        if starts is None:
            starts = np.array([0, n], dtype=np.int64)
        self.starts = np.ascontiguousarray(starts, dtype=np.int64)
        if self.starts[0] != 0 or self.starts[-1] != n or np.any(np.diff(self.starts) < 0):
            raise InputError("block starts must tile 0..n")
        self._diag = None

    @classmethod
    def from_scipy(cls, A, starts=None) -> "SparseSymmetricMatrix":
        A = sparse.csr_matrix(A, dtype=np.float64, copy=True)
        A.sum_duplicates()
        A.sort_indices()
        return cls(A.indptr, A.indices, A.data, starts)

    @classmethod
    def from_dense(cls, M, starts=None) -> "SparseSymmetricMatrix":
        return cls.from_scipy(sparse.csr_matrix(np.asarray(M, dtype=float)), starts)

    @property
    def n(self) -> int:
        return self.indptr.size - 1

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def nnz(self) -> int:
        return int(self.data.size)

    @property
    def diag_positions(self) -> np.ndarray:
        """Slot of each diagonal entry (every row must have one)."""
        if self._diag is None:
            rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
            hit = np.flatnonzero(rows == self.indices)
            if hit.size != self.n:
                raise InputError("every row needs a stored diagonal entry")
            self._diag = hit
        return self._diag

    def with_starts(self, starts) -> "SparseSymmetricMatrix":
        out = SparseSymmetricMatrix.__new__(SparseSymmetricMatrix)
        out.__dict__.update(self.__dict__)
        out.starts = np.ascontiguousarray(starts, dtype=np.int64)
        return out

    def same_pattern(self, other) -> bool:
        return (other.indptr is self.indptr and other.indices is self.indices) or (
            np.array_equal(other.indptr, self.indptr)
            and np.array_equal(other.indices, self.indices))

    def update_values(self, data) -> None:
        data = np.asarray(data, dtype=np.float64)
        if data.shape != self.data.shape:
            raise PatternChanged("value array does not match the fixed pattern")
        self.data[:] = data

    def is_symmetric(self, rtol=0.0) -> bool:
        A = self.to_scipy()
        diff = abs(A - A.T)
        return diff.nnz == 0 or diff.max() <= rtol * abs(A).max()

    def to_scipy(self) -> sparse.csr_matrix:
        return sparse.csr_matrix((self.data.copy(), self.indices.copy(),
                                  self.indptr.copy()), shape=self.shape)

    def todense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def matvec(self, x, out=None, pool: WorkerPool = SERIAL) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise DimensionMismatch(f"vector of shape {x.shape} for {self.shape} matrix")
        y = np.empty(self.n) if out is None else out
        st = self.starts
        groups = pool.chunks(st.size - 1)
        if len(groups) <= 1:
            csr_matvec_rows(self.indptr, self.indices, self.data, x, y, 0, self.n)
        else:
            pool.run(lambda g: csr_matvec_rows(self.indptr, self.indices, self.data,
                                               x, y, st[g.start], st[g.stop]), groups)
        return y

    def __matmul__(self, x):
        return self.matvec(x)

    def dot(self, a, b) -> float:
        """Deterministic block-ordered inner product."""
        return block_dot(a, b, self.starts)
