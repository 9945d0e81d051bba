import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irlscut import BlockCountExceedsNodes, DimensionMismatch, apply_permutation, partition
from irlscut.partition import balance_bound, edge_cut
from scipy import sparse


def check_partition(part, n, p, tol=0.05):
    assert part.block_count == p
    assert sorted(part.order.tolist()) == list(range(n))
    assert np.all(part.block_sizes() > 0)
    assert part.block_sizes().max() <= balance_bound(n, p, tol)
    # blocks contiguous in the new order
    assert np.all(np.diff(part.assignment[part.order]) >= 0)


def test_single_block_is_identity():
    part = partition(5, [0, 1], [1, 2], [1.0, 1.0], 1)
    assert part.order.tolist() == list(range(5))
    assert part.block_ranges.tolist() == [0, 5]


def test_path4_optimal_bisection():
    part = partition(4, [0, 1, 2], [1, 2, 3], [1.0, 1.0, 1.0], 2)
    groups = {frozenset(np.flatnonzero(part.assignment == b).tolist()) for b in (0, 1)}
    assert groups == {frozenset({0, 1}), frozenset({2, 3})}
    assert edge_cut(part.assignment, [0, 1, 2], [1, 2, 3], [1.0] * 3) == 1.0


def test_star_balanced():
    part = partition(7, [0] * 6, list(range(1, 7)), [1.0] * 6, 2)
    check_partition(part, 7, 2)


def test_too_many_blocks():
    with pytest.raises(BlockCountExceedsNodes):
        partition(3, [0], [1], [1.0], 4)


def test_disconnected_graph_tolerated():
    part = partition(6, [0, 1, 3, 4], [1, 2, 4, 5], [1.0] * 4, 2)
    check_partition(part, 6, 2)
    assert edge_cut(part.assignment, [0, 1, 3, 4], [1, 2, 4, 5], [1.0] * 4) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(8, 120), st.integers(1, 8), st.integers(0, 10 ** 6))
def test_random_balance(n, p, seed):
    rng = np.random.default_rng(seed)
    m = 3 * n
    u, v = rng.integers(0, n, m), rng.integers(0, n, m)
    keep = u != v
    part = partition(n, u[keep], v[keep], rng.uniform(0.1, 1, keep.sum()), p, seed=seed)
    check_partition(part, n, p)


def test_deterministic_for_seed():
    rng = np.random.default_rng(3)
    u, v = rng.integers(0, 200, 600), rng.integers(0, 200, 600)
    keep = u != v
    c = rng.uniform(size=keep.sum())
    a = partition(200, u[keep], v[keep], c, 5, seed=11)
    b = partition(200, u[keep], v[keep], c, 5, seed=11)
    assert np.array_equal(a.assignment, b.assignment)


def random_spd(n, rng):
    A = sparse.random(n, n, density=0.3, random_state=rng)
    A = A + A.T
    return (A + sparse.diags(np.asarray(abs(A).sum(axis=1)).ravel() + 1.0)).tocsr()


def test_permuted_solve_matches_dense_oracle():
    rng = np.random.default_rng(0)
    A = random_spd(10, rng)
    b = rng.normal(size=10)
    coo = sparse.triu(A, 1).tocoo()
    part = partition(10, coo.row, coo.col, np.abs(coo.data), 3)
    PA, Pb = apply_permutation(A, b, part)
    y = np.linalg.solve(PA.toarray(), Pb)
    x = part.unpermute(y)
    assert np.max(np.abs(x - np.linalg.solve(A.toarray(), b))) <= 1e-12


def test_permutation_preserves_spectrum_and_inverts():
    rng = np.random.default_rng(1)
    A = random_spd(12, rng)
    coo = sparse.triu(A, 1).tocoo()
    part = partition(12, coo.row, coo.col, np.abs(coo.data), 4)
    PA, _ = apply_permutation(A, np.zeros(12), part)
    assert abs(PA - PA.T).max() == 0
    for _ in range(5):
        z = rng.normal(size=12)
        pz = part.permute(z)
        assert z @ (A @ z) == pytest.approx(pz @ (PA @ pz), rel=1e-12)
        assert np.array_equal(part.unpermute(pz), z)
    assert np.allclose(np.linalg.eigvalsh(PA.toarray()), np.linalg.eigvalsh(A.toarray()))


def test_identity_partition_unchanged():
    A = random_spd(5, np.random.default_rng(2))
    part = partition(5, [], [], [], 1)
    PA, Pb = apply_permutation(A, np.arange(5.0), part)
    assert (PA != A).nnz == 0 and np.array_equal(Pb, np.arange(5.0))


def test_dimension_mismatch():
    part = partition(4, [0], [1], [1.0], 1)
    with pytest.raises(DimensionMismatch):
        apply_permutation(np.eye(3), np.zeros(3), part)
