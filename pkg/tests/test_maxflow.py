import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIXTURE_OPTIMA, FIXTURES, load_fixture
from irlscut import (TooLargeForEnumeration, WeightedGraph, brute_force_min_cut, cut_value,
                     ingest, max_flow)
from irlscut.maxflow import ResidualNetwork, min_cut


def test_path(path3):
    value, lab = max_flow(path3)
    assert value == 1.0 and lab.tolist() == [1, 1, 0]
    assert brute_force_min_cut(path3) == (1.0, pytest.approx(lab))


def test_triangle(triangle):
    assert max_flow(triangle)[0] == 1.5
    assert brute_force_min_cut(triangle)[0] == 1.5


def test_single_edge():
    g = ingest([("s", "t", 3.0)], "s", "t")
    value, lab = brute_force_min_cut(g)
    assert value == 3.0 and lab.tolist() == [1, 0]
    assert max_flow(g)[0] == 3.0


def test_cycle_tie_break(cycle4):
    # labels sorted: a, b, s, t; optima {s}, {s,a}, {s,b}, {s,a,b} all cost 2
    value, lab = brute_force_min_cut(cycle4)
    assert value == 2.0
    assert lab.tolist() == [0, 0, 1, 0]
    assert brute_force_min_cut(cycle4)[1].tolist() == lab.tolist()


def test_enumeration_limit():
    n = 23
    g = WeightedGraph.from_arrays(n, np.arange(n - 1), np.arange(1, n), np.ones(n - 1), 0, n - 1)
    with pytest.raises(TooLargeForEnumeration):
        brute_force_min_cut(g)


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_optimum(name):
    g = load_fixture(name)
    value, lab = min_cut(g)
    assert value == pytest.approx(FIXTURE_OPTIMA[name], rel=1e-12)
    at_s = g.capacity[(g.edge_u == g.source) | (g.edge_v == g.source)].sum()
    at_t = g.capacity[(g.edge_u == g.sink) | (g.edge_v == g.sink)].sum()
    assert value <= min(at_s, at_t) + 1e-12


@pytest.mark.parametrize("alpha", [1e-3, 7.0, 1e4])
def test_scaling(alpha):
    g = load_fixture("grid12_corners.max")
    v1, lab1 = max_flow(g)
    v2, lab2 = max_flow(g.scaled(alpha))
    assert v2 == pytest.approx(alpha * v1, rel=1e-9)
    assert cut_value(g, lab2) == pytest.approx(v1, rel=1e-9)


def test_residual_pair_invariant():
    g = load_fixture("geometric200.max")
    net = ResidualNetwork.build(g)
    flow, _ = max_flow(g, network=net)
    assert np.allclose(net.pair_sums(), 2 * g.capacity, rtol=1e-12)
    assert net.residual.min() >= -1e-12 * g.capacity.max()
    assert flow == pytest.approx(FIXTURE_OPTIMA["geometric200.max"], rel=1e-12)


@st.composite
def random_graph(draw):
    n = draw(st.integers(2, 10))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    u, v = list(perm[:-1]), list(perm[1:])
    extra = rng.integers(0, n, size=(draw(st.integers(0, 20)), 2))
    u += list(extra[:, 0])
    v += list(extra[:, 1])
    c = 1.0 - rng.uniform(0.0, 1.0, len(u))   # (0, 1]
    s, t = rng.choice(n, 2, replace=False)
    return WeightedGraph.from_arrays(n, u, v, c, s, t)


@settings(max_examples=200, deadline=None)
@given(random_graph())
def test_matches_enumeration(g):
    flow, lab = max_flow(g)
    best, _ = brute_force_min_cut(g)
    assert flow == pytest.approx(best, rel=1e-9)
    assert cut_value(g, lab) == pytest.approx(best, rel=1e-9)
