"""Command line front end: ``irlscut {solve,oracle,spectral,gen,bench}``.

Exit codes: 0 success, 2 input error, 3 solver failure, 4 internal
invariant violation.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .exceptions import InputError, InvalidParams, InvariantViolation, IrlsCutError
from .generate import KINDS, TERMINAL_MODES, generate_instance
from .io import read_graph, write_cut, write_json
from .maxflow import brute_force_min_cut, max_flow
from .pipeline import SolverConfig, bench, solve
from .spectral import SpectralSolve, cheeger_check

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_INVARIANT = 0, 2, 3, 4

_CONFIG_HELP = {
    "eps": "smoothing parameter",
    "T": "number of reweighting iterations",
    "pcg_tol": "PCG relative residual tolerance",
    "pcg_max_iter": "PCG iteration cap per solve",
    "block_count": "number of preconditioner blocks p",
    "block_strategy": "per-block factorization: exact_lu or ilu0",
    "warm_start": "start each PCG solve from the previous voltages",
    "rounding": "sweep, two_level or both",
    "worker_count": "threads used inside the solver phases",
    "rng_seed": "seed for the partitioner",
    "early_exit": "stop once an iteration moves no voltage by more than 1e-8",
    "balance_tolerance": "allowed block imbalance of the partition",
    "residual_norm": "PCG stopping norm: residual or preconditioned",
    "coarse_size_cap": "fall back to sweep cut above this contracted size",
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key=value file; flags override it")
    defaults = SolverConfig()
    group = p.add_argument_group("solver configuration")
    for f in fields(SolverConfig):
        group.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, default=None,
                           metavar="VALUE",
                           help=f"{_CONFIG_HELP.get(f.name, '')} "
                                f"(default: {getattr(defaults, f.name)})")


def _config_from(args) -> SolverConfig:
    overrides = {f.name: SolverConfig.parse_value(f.name, getattr(args, f.name))
                 for f in fields(SolverConfig) if getattr(args, f.name) is not None}
    if args.config is not None:
        return SolverConfig.from_file(args.config, **overrides)
    return SolverConfig(**overrides)


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_solve(args) -> int:
    cfg = _config_from(args)
    res = solve(args.input, cfg, out_dir=args.out, oracle=args.oracle,
                keep_iterates=args.voltages)
    _print_json(res.report.as_dict())
    return EXIT_OK


def cmd_oracle(args) -> int:
    g = read_graph(args.input)
    if args.brute_force:
        value, lab = brute_force_min_cut(g)
        method = "enumeration"
    else:
        value, lab = max_flow(g)
        method = "max_flow"
    if args.cut is not None:
        write_cut(g, lab, args.cut)
    _print_json({"method": method, "value": value,
                 "source_side": int(lab.sum()), "nodes": g.n, "edges": g.m})
    return EXIT_OK


def cmd_spectral(args) -> int:
    g = read_graph(args.input)
    rep = cheeger_check(g, SpectralSolve(tol=args.tol))
    out = {"lambda2": rep.lambda2, "phi": rep.phi, "lower": rep.lower,
           "upper": rep.upper, "holds": rep.holds}
    _print_json(out)
    if args.out is not None:
        write_json(out, args.out)
    return EXIT_OK if rep.holds else EXIT_INVARIANT


def _parse_params(items) -> dict:
    params = {}
    for item in items or []:
        if "=" not in item:
            raise InvalidParams(f"expected key=value, got {item!r}")
        key, val = item.split("=", 1)
        for cast in (int, float):
            try:
                params[key] = cast(val)
                break
            except ValueError:
                continue
        else:
            params[key] = {"true": True, "false": False}.get(val.lower(), val)
    return params


def cmd_gen(args) -> int:
    params = _parse_params(args.param)
    g = generate_instance(args.kind, params, seed=args.seed, out=args.out)
    _print_json({"kind": args.kind, "nodes": g.n, "edges": g.m, "out": str(args.out)})
    return EXIT_OK


def _parse_grid(items) -> dict:
    grid = {}
    for item in items or []:
        if "=" not in item:
            raise InvalidParams(f"expected key=v1,v2,..., got {item!r}")
        key, vals = item.split("=", 1)
        grid[key] = [SolverConfig.parse_value(key, v) for v in vals.split(",")]
    return grid


def cmd_bench(args) -> int:
    base = _config_from(args)
    rows = bench(args.inputs, _parse_grid(args.grid), base, out_dir=args.out,
                 oracle=not args.no_oracle, voltages=not args.no_voltages)
    failed = [r for r in rows if r["status"] != "ok"]
    print(f"{len(rows)} runs, {len(failed)} failed; results in {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irlscut",
                                     description="Parallel IRLS s-t min-cut solver")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the full pipeline on one instance")
    p.add_argument("input", type=Path, help="DIMACS or edge-list graph")
    p.add_argument("--out", type=Path, help="directory for cut, report and trace")
    p.add_argument("--oracle", action="store_true",
                   help="also compute the exact optimum and the ratio delta")
    p.add_argument("--voltages", action="store_true",
                   help="write sorted voltages of every iterate")
    _add_config_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exact min cut by max-flow or enumeration")
    p.add_argument("input", type=Path)
    p.add_argument("--brute-force", action="store_true",
                   help="enumerate all cuts (at most 22 nodes)")
    p.add_argument("--cut", type=Path, help="write the labeling here")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("spectral", help="lambda2 and the Cheeger sandwich")
    p.add_argument("input", type=Path)
    p.add_argument("--tol", type=float, default=1e-12, help="PCG tolerance (default: 1e-12)")
    p.add_argument("--out", type=Path, help="write the JSON summary here")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("gen", help="generate a synthetic instance")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="generator parameter, e.g. rows=100 cols=100 "
                        f"terminals={{{','.join(TERMINAL_MODES)}}} base=1.0")
    p.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    p.add_argument("--out", type=Path, required=True, help="output file (.max for DIMACS)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run a configuration grid over instances")
    p.add_argument("inputs", type=Path, nargs="+")
    p.add_argument("--grid", action="append", metavar="KEY=V1,V2",
                   help="configuration values to sweep, e.g. warm_start=true,false")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--no-oracle", action="store_true", help="skip the exact optimum")
    p.add_argument("--no-voltages", action="store_true", help="skip voltage matrices")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (IrlsCutError, OSError) as exc:
        code = exit_code(exc)
        tag = getattr(exc, "phase", None)
        where = f" [{tag}]" if tag else ""
        print(f"error{where}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, InvariantViolation):
        return EXIT_INVARIANT
    if isinstance(exc, (InputError, OSError)):
        return EXIT_INPUT
    return EXIT_SOLVER

if __name__ == "__main__":
    sys.exit(main())
