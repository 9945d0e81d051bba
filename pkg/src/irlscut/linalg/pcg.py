"""Preconditioned conjugate gradients with warm starts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import (BreakdownNonSpd, DimensionMismatch, InputError,
                          PreconditionerDimensionMismatch)
from .matrix import SERIAL, SparseSymmetricMatrix, WorkerPool


@dataclass
class PcgReport:
    iterations: int
    relative_residual: float
    converged: bool
    history: list = field(default_factory=list)


NORMS = ("residual", "preconditioned")


def pcg_solve(matrix: SparseSymmetricMatrix, rhs, preconditioner=None, x0=None,
              tol: float = 1e-3, max_iter: int = 50,
              pool: WorkerPool = SERIAL, norm: str = "residual", residual=None):
    """Solve ``A x = b`` by PCG until the relative residual is ``<= tol``.

    ``norm="residual"`` measures ``||b - Ax|| / ||b||``;
    ``norm="preconditioned"`` measures ``||M^-1 (b - Ax)|| / ||M^-1 b||``,
    the default test of PETSc's CG with left preconditioning.

    ``x0`` is the starting iterate (zero when omitted).  On exhaustion of
    ``max_iter`` the last iterate is returned with ``converged=False``.  When
    the recurrence residual reaches ``tol`` the true residual is recomputed
    and the iteration restarts from it if it has drifted above ``tol``.

    ``residual(x, out, pool)``, when given, computes ``b - Ax`` for those
    true-residual evaluations.  A caller that knows a cancellation-free form
    (e.g. edge by edge for a Laplacian) can use it to solve far below the
    accuracy of ``b - matvec(x)``.
    """
    if tol <= 0:
        raise InputError("tol must be positive")
    if norm not in NORMS:
        raise InputError(f"unknown residual norm {norm!r}")
    n = matrix.n
    b = np.ascontiguousarray(rhs, dtype=np.float64)
    if b.shape != (n,):
        raise DimensionMismatch(f"rhs of shape {b.shape} for system of size {n}")
    if preconditioner is not None and preconditioner.n != n:
        raise PreconditionerDimensionMismatch(
            f"preconditioner of size {preconditioner.n} for system of size {n}")
    dot = matrix.dot
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    if x.shape != (n,):
        raise DimensionMismatch(f"x0 of shape {x.shape} for system of size {n}")

    def precondition(vec, out):
        if preconditioner is None:
            out[:] = vec
            return out
        return preconditioner.apply(vec, out, pool=pool)

    q = np.empty(n)
    z = np.empty(n)
    use_pre = norm == "preconditioned"
    if use_pre:
        bnorm = math.sqrt(dot(precondition(b, z), z))
    else:
        bnorm = math.sqrt(dot(b, b))
    if bnorm == 0.0:
        return np.zeros(n), PcgReport(0, 0.0, True, [0.0])

    def measure(r, z):
        """Relative residual of ``r``; leaves ``M^-1 r`` in ``z``."""
        precondition(r, z)
        v = z if use_pre else r
        return math.sqrt(dot(v, v)) / bnorm

    def true_residual():
        if residual is not None:
            return residual(x, np.empty(n), pool)
        return b - matrix.matvec(x, q, pool=pool)

    r = true_residual()
    rel = measure(r, z)
    history = [rel]
    if rel <= tol:
        return x, PcgReport(0, rel, True, history)

    p = z.copy()
    rz = dot(r, z)
    it = 0
    while it < max_iter:
        it += 1
        matrix.matvec(p, q, pool=pool)
        pq = dot(p, q)
        if not pq > 0.0:
            raise BreakdownNonSpd(f"p'Ap = {pq!r} at iteration {it}")
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        rel = measure(r, z)
        if rel <= tol:
            r = true_residual()
            rel = measure(r, z)
            history.append(rel)
            if rel <= tol:
                return x, PcgReport(it, rel, True, history)
            p[:] = z
            rz = dot(r, z)
            continue
        history.append(rel)
        rz_new = dot(r, z)
        p *= rz_new / rz
        p += z
        rz = rz_new
    r = true_residual()
    rel = measure(r, z)
    history[-1] = rel
    return x, PcgReport(it, rel, rel <= tol, history)
