import numpy as np
import pytest

from conftest import FIXTURES, load_fixture
from irlscut import (IrlsConfig, assemble_reduced_system, electrical_flow, flow_value,
                     ingest, irls_run, joint_objective, net_outflow, polarization,
                     reweight, smoothed_objective)
from irlscut.generate import grid2d
from irlscut.irls import ReducedSystem, edge_differences
from irlscut.pipeline import SolverConfig, build_partition

# x_a and S_eps for l = 0..10 on s - a - t with c = (2, 1), eps = 1e-6, from an
# independent 50-digit mpmath evaluation of the same recurrence.
REFERENCE_XA = [0.66666666666666667, 0.8, 0.88888888888865741, 0.94117647058758002,
                0.96969696969557696, 0.9846153846126127, 0.99224806201003806,
                0.99610894940552778, 0.9980506822397187, 0.99902439020107455,
                0.99951195696672351]
REFERENCE_S = [1.3333333333348333, 1.200000000001875, 1.1111111111141551,
               1.0588235294172012, 1.0303030303131887, 1.0153846154041451,
               1.0077519380227158, 1.0038910506592242, 1.0019493178890323,
               1.0009756100556759, 1.0004880435460265]

EXACT = dict(pcg_tol=1e-14, pcg_max_iter=100, residual_norm="residual")


def voltages(g, **labels):
    x = np.zeros(g.n)
    x[g.source] = 1.0
    for name, val in labels.items():
        x[g.labels.index(name)] = val
    return x


def test_reweight_example(path3):
    w = reweight(voltages(path3, a=2 / 3), path3, 1e-6).weights
    # edges are stored (a, s) then (a, t); c * dx is -2/3 and 2/3
    assert np.allclose(w, [np.sqrt(4 / 9 + 1e-12), np.sqrt(4 / 9 + 1e-12)], rtol=1e-15)
    assert np.all(w >= 1e-6)


def test_reweight_flat_edge_equals_eps(path3):
    w = reweight(voltages(path3, a=1.0), path3, 1e-6).weights
    assert w[0] == 1e-6


def test_reweight_scaling(triangle):
    x = voltages(triangle, a=0.3)
    d = x[triangle.edge_u] - x[triangle.edge_v]
    w = reweight(x, triangle.scaled(3.0), 1e-6).weights
    assert np.allclose(w, np.sqrt(9 * triangle.capacity ** 2 * d ** 2 + 1e-12), rtol=1e-15)


def test_assembly_path(path3):
    system, L, b = assemble_reduced_system(path3)
    assert L.todense().tolist() == [[3.0]] and b.tolist() == [2.0]


def test_assembly_cycle(cycle4):
    system, L, b = assemble_reduced_system(cycle4)
    assert L.todense().tolist() == [[2.0, 0.0], [0.0, 2.0]] and b.tolist() == [1.0, 1.0]
    x, _ = irls_run(cycle4, config=IrlsConfig(T=0, **EXACT))
    assert np.allclose(x[system.node_of_row], 0.5)


def test_assembly_matches_dense_reduction():
    g = load_fixture("grid20_weighted.max")
    x = np.random.default_rng(0).uniform(size=g.n)
    x[g.source], x[g.sink] = 1.0, 0.0
    w = reweight(x, g, 1e-3)
    system, L, b = assemble_reduced_system(g, w, build_partition(g, SolverConfig()))
    full = g.laplacian(w.conductance(g)).toarray()
    rows = system.node_of_row
    assert np.allclose(L.todense(), full[np.ix_(rows, rows)], rtol=1e-14)
    assert np.allclose(b, -full[rows, g.source], rtol=1e-14)
    assert np.all(b >= 0)


def test_polarized_limit_conductances(path3):
    x = voltages(path3, a=1.0)
    cond = reweight(x, path3, 1e-6).conductance(path3)
    assert cond[1] == pytest.approx(1.0, rel=1e-12)     # cut edge (a, t)
    assert cond[0] == pytest.approx(4.0 / 1e-6, rel=1e-12)


def test_edge_residual_matches_matvec():
    g = load_fixture("geometric200.max")
    part = build_partition(g, SolverConfig())
    system = ReducedSystem(g, part)
    L, b = system.assemble(system.system_conductance(g.capacity))
    v = np.random.default_rng(1).uniform(size=system.size)
    assert np.allclose(system.residual(v), b - L.matvec(v), rtol=0, atol=1e-12)


def test_reference_sequence(path3):
    xs = []
    x, tr = irls_run(path3, config=IrlsConfig(T=10, **EXACT),
                     callback=lambda l, x, c, r: xs.append(x[0]))
    assert np.allclose(xs, REFERENCE_XA, rtol=0, atol=1e-12)
    assert np.allclose(tr.column("S_eps"), REFERENCE_S, rtol=1e-12)
    assert abs(x[0] - 1.0) < 1e-3


def test_symmetric_path_stays_half():
    g = ingest([("s", "a", 1.5), ("a", "t", 1.5)], "s", "t")
    xs = []
    irls_run(g, config=IrlsConfig(T=10, **EXACT), callback=lambda l, x, c, r: xs.append(x[0]))
    assert xs == [0.5] * 11


def test_cycle_automorphism(cycle4):
    a, b = cycle4.labels.index("a"), cycle4.labels.index("b")
    diffs = []
    irls_run(cycle4, config=IrlsConfig(T=10, **EXACT),
             callback=lambda l, x, c, r: diffs.append(x[a] - x[b]))
    assert max(map(abs, diffs)) == 0.0


def test_t_zero_is_initial_solve(path3):
    x, tr = irls_run(path3, config=IrlsConfig(T=0, **EXACT))
    assert tr.iterations == 0
    assert x[0] == pytest.approx(2 / 3, abs=1e-15)


def test_flow_value_examples(path3):
    x = voltages(path3, a=2 / 3)
    assert flow_value(x, path3, [2.0, 1.0]) == pytest.approx(2 / 3, rel=1e-15)
    assert flow_value(x, path3, [6.0, 3.0]) == pytest.approx(2.0, rel=1e-15)


def test_smoothed_objective_examples(path3):
    assert smoothed_objective(voltages(path3, a=2 / 3), path3, 1e-12) == pytest.approx(4 / 3)
    g = ingest([("s", "a", 1.0), ("a", "t", 1.0)], "s", "t")
    x = voltages(g, a=1.0)
    assert smoothed_objective(x, g, 0.1) == pytest.approx(0.1 + np.sqrt(1.01), rel=1e-15)


def test_smoothed_objective_bounds_binary():
    g = load_fixture("grid10_sides.max")
    lab = np.random.default_rng(2).integers(0, 2, g.n).astype(float)
    lab[g.source], lab[g.sink] = 1.0, 0.0
    cut = float(g.capacity[lab[g.edge_u] != lab[g.edge_v]].sum())
    s = smoothed_objective(lab, g, 1e-6)
    assert cut <= s <= cut + g.m * 1e-6


def test_joint_objective_tight_and_alternating():
    g = load_fixture("grid20_weighted.max")
    eps = 1e-3
    states = []
    irls_run(g, config=IrlsConfig(T=8, eps=eps, **EXACT),
             callback=lambda l, x, c, r: states.append(x))
    for x_prev, x_next in zip(states, states[1:]):
        w = reweight(x_prev, g, eps).weights
        h = joint_objective(x_prev, w, g, eps)
        assert h == pytest.approx(smoothed_objective(x_prev, g, eps), rel=1e-8)
        # the weighted least-squares step cannot increase the joint objective
        assert joint_objective(x_next, w, g, eps) <= h * (1 + 1e-12)


@pytest.mark.parametrize("name", FIXTURES)
def test_flow_identity_on_fixture(name):
    g = load_fixture(name)
    nt = np.ones(g.n, bool)
    nt[[g.source, g.sink]] = False
    worst = []

    def check(l, x, cond, rep):
        z = electrical_flow(x, g, cond)
        out = net_outflow(z, g)
        scale = np.abs(z).max()
        energy = flow_value(x, g, cond)
        worst.append((np.abs(out[nt]).max(initial=0.0) / scale,
                      abs(out[g.source] - energy) / energy))

    irls_run(g, build_partition(g, SolverConfig()),
             IrlsConfig(T=10, pcg_tol=1e-15, pcg_max_iter=1000, residual_norm="residual"),
             callback=check)
    cons, fv = np.max(worst, axis=0)
    assert cons <= 1e-6 and fv <= 1e-8


def test_trace_columns_and_csv(tmp_path, path3):
    _, tr = irls_run(path3, config=IrlsConfig(T=3))
    tr.to_csv(tmp_path / "t.csv")
    header = (tmp_path / "t.csv").read_text().splitlines()[0]
    assert header == "iteration,S_eps,flow_value,pcg_iters,pcg_residual,wall_ms"
    tr.to_csv(tmp_path / "u.csv", include_timing=False)
    assert "wall_ms" not in (tmp_path / "u.csv").read_text()


def test_out_of_box_warning(caplog, path3):
    import logging
    from irlscut.irls import IrlsTrace, _record
    from irlscut.linalg import PcgReport
    caplog.set_level(logging.WARNING, logger="irlscut")
    cfg = IrlsConfig(pcg_tol=1e-3)
    rep = PcgReport(1, 1e-3, True)
    _record(IrlsTrace(), 0, voltages(path3, a=1.0 + 5e-3), path3, cfg, [2.0, 1.0], rep, 0.0)
    assert caplog.text == ""
    _record(IrlsTrace(), 0, voltages(path3, a=1.0 + 2e-2), path3, cfg, [2.0, 1.0], rep, 0.0)
    assert "leaves [0, 1]" in caplog.text


def test_early_exit(path3):
    _, full = irls_run(path3, config=IrlsConfig(T=200, **EXACT))
    _, short = irls_run(path3, config=IrlsConfig(T=200, early_exit=True, **EXACT))
    assert full.iterations == 200 and short.iterations < 200


def test_polarization():
    assert polarization(np.array([0.0, 0.04, 0.5, 0.96, 1.0])) == 0.8
    assert polarization(np.array([0.3, 0.7])) == 0.0


def test_edge_differences(path3):
    d = edge_differences(voltages(path3, a=0.25), path3)
    assert d.tolist() == [2 * (0.25 - 1.0), 0.25]
