"""End-to-end runs: partition, IRLS, gather, round, report.

:func:`solve` runs one instance and :func:`bench` sweeps a configuration grid
over several instances, writing one CSV row per run plus the sorted voltage
matrices used for polarization plots.
"""
from __future__ import annotations

import contextlib
import dataclasses
import itertools
import logging
import os
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .exceptions import InputError, InvalidParams, InvariantViolation, IrlsCutError
from .graph import WeightedGraph, cut_value, split_terminals
from .io import read_graph, write_cut, write_json, write_matrix_csv, write_rows_csv
from .irls import IrlsConfig, irls_run
from .linalg import STRATEGIES, WorkerPool
from .linalg.pcg import NORMS
from .maxflow import min_cut
from .partition import Partition, partition
from .rounding import SWEEP, TWO_LEVEL, relative_approx_ratio, sweep_cut, two_level_round

logger = logging.getLogger(__name__)

ROUNDINGS = (SWEEP, TWO_LEVEL, "both")


@dataclass
class SolverConfig:
    eps: float = 1e-6
    T: int = 50
    pcg_tol: float = 1e-3
    pcg_max_iter: int = 50
    block_count: int = 4
    block_strategy: str = "exact_lu"
    warm_start: bool = True
    rounding: str = "both"
    worker_count: int = 1
    rng_seed: int = 0
    early_exit: bool = False
    balance_tolerance: float = 0.05
    residual_norm: str = "preconditioned"
    coarse_size_cap: int | None = None

    def __post_init__(self):
        if not (self.eps > 0 and self.pcg_tol > 0 and self.balance_tolerance >= 0):
            raise InvalidParams("eps and pcg_tol must be positive, balance_tolerance >= 0")
        if self.T < 0 or self.pcg_max_iter < 0:
            raise InvalidParams("T and pcg_max_iter must be non-negative")
        if self.block_count < 1 or self.worker_count < 1:
            raise InvalidParams("block_count and worker_count must be >= 1")
        if self.block_strategy not in STRATEGIES:
            raise InvalidParams(f"block_strategy must be one of {STRATEGIES}")
        if self.rounding not in ROUNDINGS:
            raise InvalidParams(f"rounding must be one of {ROUNDINGS}")
        if self.residual_norm not in NORMS:
            raise InvalidParams(f"residual_norm must be one of {NORMS}")

    def irls(self) -> IrlsConfig:
        return IrlsConfig(eps=self.eps, T=self.T, pcg_tol=self.pcg_tol,
                          pcg_max_iter=self.pcg_max_iter,
                          block_strategy=self.block_strategy,
                          warm_start=self.warm_start, early_exit=self.early_exit,
                          residual_norm=self.residual_norm)

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    # -- key=value files ------------------------------------------------------
    @classmethod
    def parse_value(cls, key: str, text: str):
        """Convert ``text`` to the type of field ``key``."""
        types = {f.name: f.type for f in fields(cls)}
        if key not in types:
            raise InvalidParams(f"unknown configuration key {key!r}")
        kind = str(types[key])
        text = text.strip()
        if "None" in kind and text.lower() in ("", "none"):
            return None
        try:
            if kind.startswith("bool"):
                low = text.lower()
                if low in ("1", "true", "yes", "on"):
                    return True
                if low in ("0", "false", "no", "off"):
                    return False
                raise ValueError(text)
            if kind.startswith("int"):
                return int(text)
            if kind.startswith("float"):
                return float(text)
        except ValueError:
            raise InvalidParams(f"bad value {text!r} for {key}") from None
        return text

    @classmethod
    def from_file(cls, path, **overrides) -> "SolverConfig":
        values = {}
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise InvalidParams(f"{path}:{lineno}: expected key=value")
                key, val = (part.strip() for part in line.split("=", 1))
                values[key] = cls.parse_value(key, val)
        values.update(overrides)
        return cls(**values)


@dataclass
class RunReport:
    instance: str
    nodes: int
    edges: int
    block_count: int
    partition_s: float = 0.0
    irls_s: float = 0.0
    sweep_s: float = 0.0
    two_level_s: float = 0.0
    total_s: float = 0.0
    irls_iterations: int = 0
    pcg_iterations: int = 0
    final_S_eps: float = float("nan")
    sweep_cut: float | None = None
    two_level_cut: float | None = None
    cut_value: float | None = None
    method: str | None = None
    size_reduction: float | None = None
    coarse_nodes: int | None = None
    optimum: float | None = None
    delta_sweep: float | None = None
    delta_two_level: float | None = None
    oracle_s: float | None = None
    files: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def phase_sum(self) -> float:
        return self.partition_s + self.irls_s + self.sweep_s + self.two_level_s


@dataclass
class SolveOutcome:
    report: RunReport
    labeling: np.ndarray
    voltages: np.ndarray
    trace: object
    partition: Partition | None


@contextlib.contextmanager
def phase(name: str):
    """Tag any library error raised inside with the pipeline phase it came from."""
    try:
        yield
    except IrlsCutError as exc:
        if getattr(exc, "phase", None) is None:
            exc.phase = name
        raise


def build_partition(g: WeightedGraph, cfg: SolverConfig) -> Partition:
    """Partition the non-terminal graph into ``min(p, #non-terminals)`` blocks."""
    sp = split_terminals(g)
    n, u, v, c = sp.nonterminal_graph(g)
    if n == 0:
        return Partition.from_assignment(np.zeros(0, dtype=np.int64), 1)
    p = cfg.block_count
    if p > n:
        logger.warning("block_count %d exceeds %d non-terminal nodes; using %d", p, n, n)
        p = n
    return partition(n, u, v, c, p, cfg.balance_tolerance, cfg.rng_seed)


def _load(source) -> tuple[WeightedGraph, str]:
    if isinstance(source, WeightedGraph):
        return source, "<graph>"
    path = Path(source)
    try:
        return read_graph(path), str(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def solve(source, config: SolverConfig | None = None, out_dir=None,
          oracle: bool = False, keep_iterates: bool = False,
          name: str | None = None) -> SolveOutcome:
    """Run the whole pipeline on a graph or graph file.

    With ``out_dir`` the chosen cut (``cut.txt``), the JSON report
    (``report.json``), the IRLS trace (``trace.csv``) and, when
    ``keep_iterates`` is set, the sorted voltages per iteration
    (``voltages.csv``) are written there.
    """
    cfg = config or SolverConfig()
    with phase("input"):
        g, label = _load(source)
    report = RunReport(instance=name or label, nodes=g.n, edges=g.m, block_count=0)
    t_start = time.perf_counter()
    with WorkerPool(cfg.worker_count) as pool:
        t0 = time.perf_counter()
        with phase("partition"):
            part = build_partition(g, cfg)
        report.partition_s = time.perf_counter() - t0
        report.block_count = part.block_count

        t0 = time.perf_counter()
        with phase("irls"):
            x, trace = irls_run(g, part, cfg.irls(), pool, keep_iterates=keep_iterates)
        report.irls_s = time.perf_counter() - t0

    results = {}
    if cfg.rounding in (SWEEP, "both"):
        t0 = time.perf_counter()
        with phase("sweep"):
            results[SWEEP] = sweep_cut(g, x)
        report.sweep_s = time.perf_counter() - t0
        report.sweep_cut = results[SWEEP].cut_value
    if cfg.rounding in (TWO_LEVEL, "both"):
        t0 = time.perf_counter()
        with phase("two_level"):
            res = two_level_round(g, x, cfg.coarse_size_cap)
        report.two_level_s = time.perf_counter() - t0
        results[TWO_LEVEL] = res
        report.two_level_cut = res.cut_value
        report.size_reduction = res.size_reduction
        report.coarse_nodes = res.coarse_nodes
    report.total_s = time.perf_counter() - t_start

    best = min(results.values(), key=lambda r: (r.cut_value, r.method != TWO_LEVEL))
    with phase("output"):
        check = cut_value(g, best.labeling)
        if check != best.cut_value:
            raise InvariantViolation(f"cut re-validation gave {check!r}, reported {best.cut_value!r}")
    report.cut_value = best.cut_value
    report.method = best.method
    report.irls_iterations = trace.iterations
    report.pcg_iterations = trace.total_pcg_iterations()
    report.final_S_eps = trace.records[-1]["S_eps"]

    if oracle:
        t0 = time.perf_counter()
        with phase("oracle"):
            opt, _ = min_cut(g)
            report.optimum = opt
            if report.sweep_cut is not None:
                report.delta_sweep = relative_approx_ratio(report.sweep_cut, opt)
            if report.two_level_cut is not None:
                report.delta_two_level = relative_approx_ratio(report.two_level_cut, opt)
        report.oracle_s = time.perf_counter() - t0

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = {"cut": out / "cut.txt", "trace": out / "trace.csv",
                 "report": out / "report.json"}
        write_cut(g, best.labeling, files["cut"])
        trace.to_csv(files["trace"])
        if keep_iterates:
            files["voltages"] = out / "voltages.csv"
            write_matrix_csv(sorted_voltage_matrix(trace), files["voltages"])
        report.files = {k: os.fspath(v) for k, v in files.items()}
        summary = report.as_dict()
        summary["delta_if_oracle_available"] = (
            relative_approx_ratio(best.cut_value, report.optimum)
            if report.optimum is not None else None)
        summary["config"] = cfg.as_dict()
        write_json(summary, files["report"])
    return SolveOutcome(report, best.labeling, x, trace, part)


def sorted_voltage_matrix(trace) -> np.ndarray:
    """One row per IRLS iterate holding its voltages in ascending order."""
    if trace.iterates is None:
        raise InputError("run was made without keep_iterates")
    return np.sort(np.vstack(trace.iterates), axis=1)


def expand_grid(grid) -> list[dict]:
    """``{"a": [1, 2], "b": [x]}`` -> list of override dicts; lists pass through."""
    if grid is None:
        return [{}]
    if isinstance(grid, dict):
        keys = list(grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*grid.values())]
    return [dict(g) for g in grid]


BENCH_COLUMNS = ["run", "instance", "status", "error"]


def bench(instances, grid=None, base: SolverConfig | None = None, out_dir=None,
          oracle: bool = True, voltages: bool = True) -> list[dict]:
    """Run every instance under every configuration of ``grid``.

    ``instances`` holds paths or ``(name, graph)`` pairs.  Each run yields
    one row with the report fields and the configuration used; a failing
    run is recorded with its error and the sweep continues.  With
    ``out_dir`` the rows go to ``bench.csv`` and the sorted voltage matrix
    of run ``k`` to ``voltages_<k>.csv``.
    """
    instances = list(instances)
    if not instances:
        raise InputError("bench needs at least one instance")
    base = base or SolverConfig()
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    rows = []
    run = 0
    for inst in instances:
        name, source = (inst if isinstance(inst, tuple) else (str(inst), inst))
        for overrides in expand_grid(grid):
            row = {"run": run, "instance": name, "status": "ok", "error": ""}
            try:
                cfg = base.replace(**overrides)
                row.update(cfg.as_dict())
                res = solve(source, cfg, oracle=oracle, keep_iterates=voltages, name=name)
                rep = res.report.as_dict()
                rep.pop("files")
                rep.pop("instance")
                row.update(rep)
                if voltages and out is not None:
                    path = out / f"voltages_{run}.csv"
                    write_matrix_csv(sorted_voltage_matrix(res.trace), path)
                    row["voltages_file"] = os.fspath(path)
            except (IrlsCutError, OSError, TypeError) as exc:
                row["status"] = "failed"
                row["error"] = f"{getattr(exc, 'phase', None) or 'setup'}: {exc}"
                logger.warning("run %d on %s failed: %s", run, name, row["error"])
            rows.append(row)
            run += 1
    if out is not None:
        columns = list(BENCH_COLUMNS)
        for row in rows:
            columns.extend(k for k in row if k not in columns)
        write_rows_csv([{c: r.get(c, "") for c in columns} for r in rows],
                       out / "bench.csv", columns)
    return rows
