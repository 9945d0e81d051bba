"""Readers and writers for the on-disk formats.

Graphs: DIMACS max-flow (``p max``/``n``/``a`` lines, arcs read as
undirected and summed) and a plain triple list whose first line is
``<source> <sink>``.  Also partitions, cut labelings, CSV traces and
Matrix Market matrices.
"""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np
import scipy.io

from .exceptions import InputError
from .graph import WeightedGraph, ingest


def _token(tok: str):
    try:
        return int(tok)
    except ValueError:
        return tok


def _lines(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if line:
                yield lineno, line


def read_dimacs(path) -> WeightedGraph:
    n_decl = None
    s = t = None
    edges = []
    for lineno, line in _lines(path):
        parts = line.split()
        kind = parts[0]
        if kind == "c":
            continue
        try:
            if kind == "p":
                if len(parts) != 4 or parts[1] != "max":
                    raise InputError(f"line {lineno}: expected 'p max n m'")
                n_decl = int(parts[2])
            elif kind == "n":
                node, role = int(parts[1]), parts[2]
                if role == "s":
                    s = node
                elif role == "t":
                    t = node
                else:
                    raise InputError(f"line {lineno}: unknown terminal {role!r}")
            elif kind == "a":
                edges.append((int(parts[1]), int(parts[2]), float(parts[3])))
            else:
                raise InputError(f"line {lineno}: unknown line type {kind!r}")
        except (IndexError, ValueError) as exc:
            raise InputError(f"line {lineno}: {exc}") from exc
    if n_decl is None:
        raise InputError("missing 'p max' problem line")
    if s is None or t is None:
        raise InputError("missing source or sink designation")
    for u, v, _ in edges:
        if not (1 <= u <= n_decl and 1 <= v <= n_decl):
            raise InputError(f"arc ({u}, {v}) outside 1..{n_decl}")
    return ingest(edges, s, t, nodes=range(1, n_decl + 1))


def write_dimacs(g: WeightedGraph, path) -> None:
    """Write with 1-based ids; each undirected edge becomes one arc."""
    with open(path, "w") as fh:
        fh.write(f"p max {g.n} {g.m}\n")
        fh.write(f"n {g.source + 1} s\n")
        fh.write(f"n {g.sink + 1} t\n")
        for a, b, c in zip(g.edge_u.tolist(), g.edge_v.tolist(), g.capacity.tolist()):
            fh.write(f"a {a + 1} {b + 1} {c!r}\n")


def read_edge_list(path) -> WeightedGraph:
    header = None
    edges = []
    for lineno, line in _lines(path):
        if line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 2:
                raise InputError(f"line {lineno}: header must be '<source> <sink>'")
            header = (_token(parts[0]), _token(parts[1]))
            continue
        if len(parts) != 3:
            raise InputError(f"line {lineno}: expected 'u v capacity'")
        try:
            cap = float(parts[2])
        except ValueError as exc:
            raise InputError(f"line {lineno}: {exc}") from exc
        edges.append((_token(parts[0]), _token(parts[1]), cap))
    if header is None:
        raise InputError("empty edge list file")
    return ingest(edges, *header)


def write_edge_list(g: WeightedGraph, path) -> None:
    lab = g.labels
    with open(path, "w") as fh:
        fh.write(f"{lab[g.source]} {lab[g.sink]}\n")
        for a, b, c in g.edge_list():
            fh.write(f"{a} {b} {c!r}\n")


def read_graph(path) -> WeightedGraph:
    """Dispatch on content: DIMACS if any line starts with ``p max``."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    for _, line in _lines(path):
        if line.startswith("c"):
            continue
        if line.startswith("p "):
            return read_dimacs(path)
        break
    return read_edge_list(path)


def write_graph(g: WeightedGraph, path) -> None:
    if str(path).endswith((".max", ".dimacs")):
        write_dimacs(g, path)
    else:
        write_edge_list(g, path)


def read_partition(path) -> np.ndarray:
    """One block id per line, for non-terminal nodes in increasing id order."""
    vals = [int(line) for _, line in _lines(path)]
    return np.asarray(vals, dtype=np.int64)


def write_partition(assignment, path) -> None:
    with open(path, "w") as fh:
        fh.writelines(f"{int(b)}\n" for b in assignment)


def write_cut(g: WeightedGraph, labeling, path) -> None:
    with open(path, "w") as fh:
        for lab, side in zip(g.labels, np.asarray(labeling).tolist()):
            fh.write(f"{lab} {side}\n")


def read_cut(path) -> dict:
    out = {}
    for lineno, line in _lines(path):
        parts = line.split()
        if len(parts) != 2 or parts[1] not in ("0", "1"):
            raise InputError(f"line {lineno}: expected 'node_id 0|1'")
        out[_token(parts[0])] = int(parts[1])
    return out


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_rows_csv(rows: list[dict], path, columns=None) -> None:
    """CSV with floats written via ``repr`` so values round-trip bitwise."""
    if columns is None:
        columns = list(rows[0]) if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(row[c]) if isinstance(row[c], float) else row[c]
                        for c in columns])


def write_matrix_csv(matrix, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in np.asarray(matrix):
            w.writerow([repr(float(x)) for x in row])


def write_mm(obj, path) -> None:
    """Matrix Market export; 1-D arrays are written as dense column vectors."""
    if isinstance(obj, np.ndarray) and obj.ndim == 1:
        obj = obj.reshape(-1, 1)
    scipy.io.mmwrite(os.fspath(path), obj, precision=17)


def read_mm(path):
    out = scipy.io.mmread(os.fspath(path))
    if isinstance(out, np.ndarray) and out.ndim == 2 and out.shape[1] == 1:
        return out.ravel()
    return out
