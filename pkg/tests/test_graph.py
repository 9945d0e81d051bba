import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irlscut import (DisconnectedGraph, InputError, InvalidLabeling, NonPositiveCapacity,
                     SourceEqualsSink, WeightedGraph, cut_value, ingest, split_terminals)
from irlscut.io import read_edge_list, write_edge_list


def scan_cut(edges, source_side):
    """Reference cut value: loop over the raw edge list."""
    return sum(c for u, v, c in edges if (u in source_side) != (v in source_side))


def test_path_counts(path3):
    assert (path3.n, path3.m) == (3, 2)


def test_duplicate_edges_merge():
    g = ingest([("s", "a", 1.0), ("a", "s", 1.0), ("a", "t", 3.0)], "s", "t")
    assert g.m == 2
    assert sorted(g.edge_list()) == [("a", "s", 2.0), ("a", "t", 3.0)]


def test_triangle_direct_edge(triangle):
    sp = split_terminals(triangle)
    assert sp.st_edges.size == 1
    assert sp.st_capacity == 0.5


def test_split_path(path3):
    sp = split_terminals(path3)
    assert [path3.labels[i] for i in sp.nonterminal_nodes] == ["a"]
    assert sp.nt_edges.size == 0
    assert sorted(sp.terminal_edges(path3), key=lambda e: e[1]) == [(0, "s", 2.0), (0, "t", 1.0)]


def test_split_triangle(triangle):
    sp = split_terminals(triangle)
    assert [triangle.labels[i] for i in sp.nonterminal_nodes] == ["a"]
    assert sorted(e[1:] for e in sp.terminal_edges(triangle)) == [("s", 1.0), ("t", 1.0)]


def test_split_cycle(cycle4):
    sp = split_terminals(cycle4)
    assert sorted(cycle4.labels[i] for i in sp.nonterminal_nodes) == ["a", "b"]
    assert sp.nt_edges.size == 0
    assert sp.term_edges.size == 4


def test_cut_examples(path3, triangle):
    assert cut_value(path3, {0, 1}) == 1.0          # {s, a}
    assert cut_value(triangle, {1}) == 1.5          # {s}
    assert cut_value(triangle, {0, 1}) == 1.5       # {s, a}


def test_cut_rejects_bad_labeling(path3):
    with pytest.raises(InvalidLabeling):
        cut_value(path3, np.array([1, 1, 1]))
    with pytest.raises(InvalidLabeling):
        cut_value(path3, np.array([1, 0]))


@pytest.mark.parametrize("edges,s,t,exc", [
    ([("s", "a", 1.0), ("a", "t", 0.0)], "s", "t", NonPositiveCapacity),
    ([("s", "a", 1.0), ("a", "t", -1.0)], "s", "t", NonPositiveCapacity),
    ([("s", "a", 1.0), ("a", "t", float("nan"))], "s", "t", NonPositiveCapacity),
    ([("s", "a", 1.0), ("b", "t", 1.0)], "s", "t", DisconnectedGraph),
    ([("s", "a", 1.0)], "s", "s", SourceEqualsSink),
    ([], "s", "t", InputError),
])
def test_ingest_errors(edges, s, t, exc):
    with pytest.raises(exc):
        ingest(edges, s, t)


def test_self_loops_dropped():
    g = ingest([("s", "s", 5.0), ("s", "t", 1.0)], "s", "t")
    assert g.m == 1


def test_laplacian_and_incidence(triangle):
    L = triangle.laplacian().toarray()
    B = triangle.incidence.todense()
    assert np.allclose(L, B.T @ np.diag(triangle.capacity) @ B)
    assert np.allclose(L.sum(axis=1), 0.0)


def test_roundtrip_idempotent(tmp_path, triangle):
    write_edge_list(triangle, tmp_path / "a.txt")
    g1 = read_edge_list(tmp_path / "a.txt")
    write_edge_list(g1, tmp_path / "b.txt")
    assert (tmp_path / "a.txt").read_text() == (tmp_path / "b.txt").read_text()
    assert g1.edge_list() == triangle.edge_list()


@st.composite
def small_graphs(draw):
    n = draw(st.integers(3, 8))
    # spanning path guarantees connectivity
    perm = draw(st.permutations(range(n)))
    pairs = {tuple(sorted(p)) for p in zip(perm, perm[1:])}
    extra = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=12))
    pairs |= {tuple(sorted(p)) for p in extra if p[0] != p[1]}
    pairs = sorted(pairs)
    caps = draw(st.lists(st.floats(0.01, 10.0), min_size=len(pairs), max_size=len(pairs)))
    return n, [(u, v, c) for (u, v), c in zip(pairs, caps)]


@settings(max_examples=60, deadline=None)
@given(small_graphs(), st.floats(0.1, 10.0))
def test_cut_matches_scan_and_scales(data, alpha):
    n, edges = data
    g = ingest(edges, 0, n - 1)
    sp = split_terminals(g)
    assert sp.nt_edges.size + sp.term_edges.size + sp.st_edges.size == g.m
    scaled = g.scaled(alpha)
    for bits in itertools.product((0, 1), repeat=n - 2):
        side = {0} | {i + 1 for i, b in enumerate(bits) if b}
        ref = scan_cut(edges, side)
        assert cut_value(g, side) == pytest.approx(ref, rel=1e-12, abs=1e-12)
        assert cut_value(scaled, side) == pytest.approx(alpha * ref, rel=1e-12, abs=1e-12)


def test_from_arrays_out_of_range():
    with pytest.raises(InputError):
        WeightedGraph.from_arrays(2, [0], [2], [1.0], 0, 1)
