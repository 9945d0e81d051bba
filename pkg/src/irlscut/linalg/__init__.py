from .kernels import ldlt_factor, ldlt_solve
from .matrix import SERIAL, SparseSymmetricMatrix, WorkerPool
from .pcg import PcgReport, pcg_solve
from .precond import (EXACT_LU, ILU0, STRATEGIES, BlockJacobiPreconditioner,
                      factor_blocks)

__all__ = [
    "SparseSymmetricMatrix", "WorkerPool", "SERIAL", "PcgReport", "pcg_solve",
    "BlockJacobiPreconditioner", "factor_blocks", "EXACT_LU", "ILU0",
    "STRATEGIES", "ldlt_factor", "ldlt_solve", "dense_ldlt_solve",
]


def dense_ldlt_solve(A, b):
    """Solve a dense SPD system with the LDL^T kernel (small blocks, oracles)."""
    import numpy as np

    A = np.ascontiguousarray(A, dtype=float)
    L, d = ldlt_factor(A)
    out = np.empty(A.shape[0])
    ldlt_solve(L, d, np.ascontiguousarray(b, dtype=float), out)
    return out
