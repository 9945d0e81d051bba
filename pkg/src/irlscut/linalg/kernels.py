"""Compiled inner loops.  All kernels release the GIL so worker threads overlap."""
import numba as nb
import numpy as np


@nb.njit(nogil=True, cache=True)
def csr_matvec_rows(indptr, indices, data, x, y, lo, hi):
    for i in range(lo, hi):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc += data[k] * x[indices[k]]
        y[i] = acc


@nb.njit(nogil=True, cache=True)
def block_dot(a, b, starts):
    """Sum of ``a*b`` reduced per block, then across blocks in block order.

    The association order depends only on ``starts``, never on how the work
    is scheduled.
    """
    total = 0.0
    for j in range(starts.size - 1):
        part = 0.0
        for i in range(starts[j], starts[j + 1]):
            part += a[i] * b[i]
        total += part
    return total


@nb.njit(nogil=True, cache=True)
def ilu0_factor(indptr, indices, data, diag, pivot_rel_tol):
    """ILU(0) in place on a copy of ``data``; column indices must be sorted.

    Returns ``(lu, bad_row)`` where ``bad_row`` is -1 on success or the first
    row whose pivot fell below ``pivot_rel_tol`` times its row magnitude.
    """
    n = indptr.size - 1
    lu = data.copy()
    iw = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        rowmax = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            iw[indices[p]] = p
            a = abs(data[p])
            if a > rowmax:
                rowmax = a
        for p in range(indptr[i], diag[i]):
            k = indices[p]
            lu[p] /= lu[diag[k]]
            lik = lu[p]
            for q in range(diag[k] + 1, indptr[k + 1]):
                pos = iw[indices[q]]
                if pos >= 0:
                    lu[pos] -= lik * lu[q]
        for p in range(indptr[i], indptr[i + 1]):
            iw[indices[p]] = -1
        if not abs(lu[diag[i]]) >= pivot_rel_tol * rowmax or rowmax == 0.0:
            return lu, i
    return lu, -1


@nb.njit(nogil=True, cache=True)
def lu_csr_solve(indptr, indices, lu, diag, r, out):
    """Solve ``(L U) out = r`` with unit-lower L and U sharing one CSR pattern."""
    n = indptr.size - 1
    for i in range(n):
        acc = r[i]
        for p in range(indptr[i], diag[i]):
            acc -= lu[p] * out[indices[p]]
        out[i] = acc
    for i in range(n - 1, -1, -1):
        acc = out[i]
        for p in range(diag[i] + 1, indptr[i + 1]):
            acc -= lu[p] * out[indices[p]]
        out[i] = acc / lu[diag[i]]


@nb.njit(nogil=True, cache=True)
def ldlt_factor(a):
    """Dense LDL^T without pivoting; returns (L with unit diagonal, d)."""
    n = a.shape[0]
    L = np.eye(n)
    d = np.zeros(n)
    for j in range(n):
        s = a[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k] * d[k]
        d[j] = s
        for i in range(j + 1, n):
            s = a[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k] * d[k]
            L[i, j] = s / d[j]
    return L, d


@nb.njit(nogil=True, cache=True)
def ldlt_solve(L, d, r, out):
    n = d.size
    for i in range(n):
        acc = r[i]
        for k in range(i):
            acc -= L[i, k] * out[k]
        out[i] = acc
    for i in range(n):
        out[i] /= d[i]
    for i in range(n - 1, -1, -1):
        acc = out[i]
        for k in range(i + 1, n):
            acc -= L[k, i] * out[k]
        out[i] = acc


@nb.njit(nogil=True, cache=True)
def triangular_pair_solve(l_ptr, l_idx, l_val, u_ptr, u_idx, u_val, r, out):
    """Solve ``L U out = r`` for CSR unit-lower ``L`` and CSR upper ``U``.

    The stored diagonal of ``L`` (if any) is ignored; ``U`` must store its
    diagonal.
    """
    n = l_ptr.size - 1
    for i in range(n):
        acc = r[i]
        for p in range(l_ptr[i], l_ptr[i + 1]):
            j = l_idx[p]
            if j < i:
                acc -= l_val[p] * out[j]
        out[i] = acc
    for i in range(n - 1, -1, -1):
        acc = out[i]
        piv = 0.0
        for p in range(u_ptr[i], u_ptr[i + 1]):
            j = u_idx[p]
            if j > i:
                acc -= u_val[p] * out[j]
            elif j == i:
                piv = u_val[p]
        out[i] = acc / piv
