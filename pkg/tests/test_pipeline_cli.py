import json

import numpy as np
import pytest

from conftest import DATA, FIXTURE_OPTIMA
from irlscut import InvalidParams, SolverConfig, bench, generate_instance, read_graph, solve
from irlscut.cli import main
from irlscut.generate import grid2d, grid3d_26conn, path, random_geometric
from irlscut.io import read_cut


def test_path_fixture_both_roundings(tmp_path):
    res = solve(DATA / "path3.txt", SolverConfig(rounding="both"), out_dir=tmp_path, oracle=True)
    rep = res.report
    assert rep.sweep_cut is not None and rep.two_level_cut is not None
    assert rep.sweep_cut >= rep.two_level_cut == 1.0
    assert rep.delta_two_level == 0.0
    summary = json.loads((tmp_path / "report.json").read_text())
    assert summary["delta_if_oracle_available"] == 0.0
    assert summary["method"] in ("sweep", "two_level")
    assert read_cut(tmp_path / "cut.txt") == {"a": 1, "s": 1, "t": 0}


def test_t_zero_sweep():
    res = solve(DATA / "grid10_sides.max", SolverConfig(T=0, rounding="sweep"))
    assert res.trace.iterations == 0 and res.report.method == "sweep"
    assert res.report.two_level_cut is None


def test_phase_times_sum_to_total():
    res = solve(grid2d(40, 40, terminals="weighted", seed=1), SolverConfig(T=10))
    rep = res.report
    assert abs(rep.phase_sum - rep.total_s) <= 0.05 * rep.total_s


def test_partition_reused_across_iterations():
    res = solve(DATA / "grid20_weighted.max", SolverConfig(T=5))
    assert res.trace.block_ranges == tuple(res.partition.block_ranges.tolist())


@pytest.mark.parametrize("workers", [2, 8])
def test_worker_count_does_not_change_results(tmp_path, workers):
    runs = []
    for w in (1, workers):
        out = tmp_path / f"w{w}"
        res = solve(DATA / "geometric200.max", SolverConfig(worker_count=w, block_count=8),
                    out_dir=out)
        runs.append((res, out))
    (a, da), (b, db) = runs
    assert np.array_equal(a.labeling, b.labeling)
    assert np.array_equal(a.voltages, b.voltages)
    strip = [r | {"wall_ms": 0} for r in a.trace.records]
    assert strip == [r | {"wall_ms": 0} for r in b.trace.records]


def test_config_file_and_overrides(tmp_path):
    f = tmp_path / "cfg.txt"
    f.write_text("# solver settings\nT = 7\nwarm_start = false\npcg_tol=1e-5  # tighter\n")
    cfg = SolverConfig.from_file(f, T=3)
    assert (cfg.T, cfg.warm_start, cfg.pcg_tol) == (3, False, 1e-5)
    f.write_text("nonsense = 1\n")
    with pytest.raises(InvalidParams):
        SolverConfig.from_file(f)


@pytest.mark.parametrize("bad", [dict(eps=0), dict(block_count=0), dict(rounding="best"),
                                 dict(block_strategy="qr"), dict(residual_norm="max")])
def test_config_validation(bad):
    with pytest.raises(InvalidParams):
        SolverConfig(**bad)


def test_block_count_clamped(caplog):
    import logging
    caplog.set_level(logging.WARNING, logger="irlscut")
    res = solve(DATA / "cycle4.txt", SolverConfig(block_count=4))
    assert res.report.block_count == 2 and "exceeds" in caplog.text


def test_bench_warm_cold_and_voltages(tmp_path):
    g = read_graph(DATA / "grid20_weighted.max")
    rows = bench([("grid20", g)], {"warm_start": [True, False]}, SolverConfig(), tmp_path)
    assert [r["warm_start"] for r in rows] == [True, False]
    assert rows[0]["pcg_iterations"] <= rows[1]["pcg_iterations"]
    assert (tmp_path / "bench.csv").read_text().count("\n") == 3
    volt = np.loadtxt(tmp_path / "voltages_0.csv", delimiter=",")
    assert volt.shape == (51, g.n)


def test_bench_polarization_export_on_path(tmp_path):
    rows = bench([DATA / "path3.txt"], None, SolverConfig(T=10), tmp_path)
    volt = np.loadtxt(rows[0]["voltages_file"], delimiter=",")
    assert volt.shape == (11, 3)
    assert np.all(np.diff(volt, axis=1) >= 0)


def test_bench_records_failures(tmp_path):
    rows = bench([DATA / "path3.txt", tmp_path / "missing.txt"], None, SolverConfig(T=2),
                 tmp_path, oracle=False)
    assert [r["status"] for r in rows] == ["ok", "failed"]
    assert rows[1]["error"].startswith("input")


def test_generators():
    g = grid2d(4, 4, base=2.0, seed=7)
    assert g.n == 18
    assert np.all((g.capacity > 2.0) & (g.capacity < 3.0))
    assert np.array_equal(grid2d(4, 4, base=2.0, seed=7).capacity, g.capacity)
    p = path(3)
    assert (p.n, p.m, p.source, p.sink) == (3, 2, 0, 2)
    assert random_geometric(200, seed=1).is_connected()
    h = grid3d_26conn(3, 3, 3)
    assert h.n == 29
    # 26-connectivity: interior node has 26 neighbours
    assert np.sum((h.edge_u == 13) | (h.edge_v == 13)) == 26
    for mode in ("sides", "corners", "weighted"):
        assert grid2d(5, 6, terminals=mode).is_connected()


def test_generate_instance_errors(tmp_path):
    with pytest.raises(InvalidParams):
        generate_instance("torus", {})
    with pytest.raises(InvalidParams):
        generate_instance("grid2d", {"rows": 3})
    with pytest.raises(InvalidParams):
        generate_instance("grid2d", {"rows": 3, "cols": 3, "terminals": "middle"})
    with pytest.raises(InvalidParams):
        generate_instance("grid2d", {"rows": 3, "cols": 3, "colour": 1})
    g = generate_instance("path", {"n": 5}, out=tmp_path / "p.max")
    assert read_graph(tmp_path / "p.max").m == g.m


# -- command line -----------------------------------------------------------


def test_cli_solve(tmp_path, capsys):
    code = main(["solve", str(DATA / "grid10_sides.max"), "--out", str(tmp_path),
                 "--oracle", "--T", "20", "--voltages"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["optimum"] == pytest.approx(FIXTURE_OPTIMA["grid10_sides.max"], rel=1e-12)
    for name in ("cut.txt", "trace.csv", "report.json", "voltages.csv"):
        assert (tmp_path / name).exists()


def test_cli_config_file(tmp_path, capsys):
    f = tmp_path / "cfg"
    f.write_text("T=2\nrounding=sweep\n")
    assert main(["solve", str(DATA / "path3.txt"), "--config", str(f)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["irls_iterations"] == 2 and out["two_level_cut"] is None


def test_cli_oracle_and_spectral(tmp_path, capsys):
    assert main(["oracle", str(DATA / "triangle.txt"), "--brute-force",
                 "--cut", str(tmp_path / "c.txt")]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == 1.5
    assert main(["spectral", str(DATA / "path3.txt"), "--out", str(tmp_path / "s.json")]) == 0
    res = json.loads((tmp_path / "s.json").read_text())
    assert res["holds"] and res["lower"] <= res["lambda2"] <= res["upper"]


def test_cli_gen_and_bench(tmp_path, capsys):
    inst = tmp_path / "g.max"
    assert main(["gen", "grid2d", "--param", "rows=6", "--param", "cols=5",
                 "--param", "terminals=corners", "--seed", "3", "--out", str(inst)]) == 0
    assert read_graph(inst).n == 32
    assert main(["bench", str(inst), "--grid", "warm_start=true,false", "--out",
                 str(tmp_path / "b"), "--T", "5"]) == 0
    assert "2 runs, 0 failed" in capsys.readouterr().out


def test_cli_help_lists_defaults(capsys):
    with pytest.raises(SystemExit):
        main(["solve", "--help"])
    text = capsys.readouterr().out
    assert "(default: 1e-06)" in text and "(default: 50)" in text


@pytest.mark.parametrize("argv,code", [
    (["solve", "missing-file.txt"], 2),
    (["solve", str(DATA / "path3.txt"), "--eps", "-1"], 2),
    (["gen", "grid2d", "--param", "rows=2", "--out", "x.max"], 2),
    (["oracle", str(DATA / "grid10_sides.max"), "--brute-force"], 2),
])
def test_cli_exit_codes(argv, code, capsys):
    assert main(argv) == code
    assert capsys.readouterr().err.startswith("error")


def test_exit_code_mapping():
    from irlscut.cli import exit_code
    from irlscut.exceptions import BreakdownNonSpd, InvariantViolation, NonPositiveCapacity
    assert exit_code(InvariantViolation("x")) == 4
    assert exit_code(BreakdownNonSpd("x")) == 3
    assert exit_code(NonPositiveCapacity("x")) == 2
    assert exit_code(OSError("x")) == 2


def test_cli_phase_tag(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("s t\ns a 1\na t 0\n")
    assert main(["solve", str(bad)]) == 2
    assert capsys.readouterr().err.startswith("error [input]: NonPositiveCapacity")
