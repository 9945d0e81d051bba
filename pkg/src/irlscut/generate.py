"""Synthetic s-t min-cut instances.

Every generator draws edge weights as ``base + U(0, 1)`` and adds two extra
nodes for the terminals (``s = n``, ``t = n + 1`` where ``n`` counts the
non-terminal nodes), except :func:`path`, whose ends are the terminals.

Terminal attachment modes:

``sides``
    s joins every node on the low-x face, t every node on the high-x face.
``corners``
    s joins the node nearest the low corner, t the node nearest the high one.
``weighted``
    Stand-in for flow-improvement instances: a seed set R (nodes left of a
    geometric bisection, with a random bulge so the boundary is not
    straight) gets s-edges of weight ``alpha * deg(v)``; the rest get
    t-edges of weight ``alpha * deg(v) * vol(R) / vol(V - R)``.  Both
    trivial cuts then cost ``alpha * vol(R)``; ``alpha`` is
    ``alpha_scale * cut(R) / vol(R)``, so with ``alpha_scale > 1`` they
    cost more than the seed boundary and the optimum lies inside.
"""
from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .exceptions import InvalidParams
from .graph import WeightedGraph
from .io import write_graph

TERMINAL_MODES = ("sides", "corners", "weighted")
KINDS = ("grid2d", "grid3d_26conn", "random_geometric", "path")
MAX_RADIUS_RETRIES = 20


def _weights(rng, count, base):
    return base + rng.uniform(0.0, 1.0, count)


def _check_positive_int(name, value, minimum=1):
    if int(value) != value or value < minimum:
        raise InvalidParams(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def _attach(n, u, v, c, coords, mode, rng, base, alpha_scale):
    """Append terminal edges to a non-terminal graph on nodes ``0..n-1``."""
    if mode not in TERMINAL_MODES:
        raise InvalidParams(f"unknown terminal mode {mode!r}; choose from {TERMINAL_MODES}")
    s, t = n, n + 1
    x = coords[:, 0]
    if mode == "sides":
        lo, hi = x.min(), x.max()
        span = max(hi - lo, 1e-12)
        left = np.flatnonzero(x <= lo + 1e-9 * span) if coords.dtype.kind == "i" else \
            np.flatnonzero(x <= lo + 0.05 * span)
        right = np.flatnonzero(x >= hi - 1e-9 * span) if coords.dtype.kind == "i" else \
            np.flatnonzero(x >= hi - 0.05 * span)
        tu = np.concatenate([np.full(left.size, s), right])
        tv = np.concatenate([left, np.full(right.size, t)])
        tc = _weights(rng, tu.size, base)
    elif mode == "corners":
        score = coords.sum(axis=1).astype(float)
        a, b = int(np.argmin(score)), int(np.argmax(score))
        tu = np.array([s, b])
        tv = np.array([a, t])
        tc = _weights(rng, 2, base)
    else:
        if not alpha_scale > 0:
            raise InvalidParams("alpha_scale must be positive")
        deg = np.bincount(u, weights=c, minlength=n) + np.bincount(v, weights=c, minlength=n)
        cf = coords.astype(float)
        span = np.ptp(cf, axis=0)
        span[span == 0] = 1.0
        unit = (cf - cf.min(axis=0)) / span
        # bisection at x = 1/2 with a smooth random bulge along the other axes
        phase = rng.uniform(0, 2 * np.pi)
        amp = rng.uniform(0.1, 0.2)
        if unit.shape[1] > 1:
            bulge = amp * np.sin(2 * np.pi * unit[:, 1] + phase)
        else:
            bulge = np.zeros(n)
        seed_set = unit[:, 0] < 0.5 + bulge
        if seed_set.all() or not seed_set.any():
            seed_set = unit[:, 0] < np.median(unit[:, 0])
        vol_r, vol_rest = deg[seed_set].sum(), deg[~seed_set].sum()
        alpha = alpha_scale * c[seed_set[u] != seed_set[v]].sum() / vol_r
        inside, outside = np.flatnonzero(seed_set), np.flatnonzero(~seed_set)
        tu = np.concatenate([np.full(inside.size, s), outside])
        tv = np.concatenate([inside, np.full(outside.size, t)])
        tc = np.concatenate([alpha * deg[inside], alpha * deg[outside] * vol_r / vol_rest])
    return (np.concatenate([u, tu]), np.concatenate([v, tv]),
            np.concatenate([c, tc]), s, t)


def grid2d(rows: int, cols: int, base: float = 1.0, terminals: str = "sides",
           seed: int = 0, alpha_scale: float = 2.0) -> WeightedGraph:
    """4-connected ``rows x cols`` grid; x runs along the columns."""
    rows = _check_positive_int("rows", rows)
    cols = _check_positive_int("cols", cols)
    rng = np.random.default_rng(seed)
    idx = np.arange(rows * cols).reshape(rows, cols)
    u = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    v = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    c = _weights(rng, u.size, base)
    rr, cc = np.divmod(np.arange(rows * cols), cols)
    coords = np.column_stack([cc, rr])
    n = rows * cols
    u, v, c, s, t = _attach(n, u, v, c, coords, terminals, rng, base, alpha_scale)
    return WeightedGraph.from_arrays(n + 2, u, v, c, s, t)


def grid3d_26conn(nx: int, ny: int, nz: int, base: float = 1.0,
                  terminals: str = "sides", seed: int = 0,
                  alpha_scale: float = 2.0) -> WeightedGraph:
    """3-D grid where every node links to all 26 surrounding neighbours."""
    nx = _check_positive_int("nx", nx)
    ny = _check_positive_int("ny", ny)
    nz = _check_positive_int("nz", nz)
    rng = np.random.default_rng(seed)
    idx = np.arange(nx * ny * nz).reshape(nx, ny, nz)
    us, vs = [], []
    # the 13 offsets that are lexicographically positive cover each pair once
    for d in itertools.product((-1, 0, 1), repeat=3):
        if d <= (0, 0, 0):
            continue
        sl_a = tuple(slice(max(0, -k), n - max(0, k)) for k, n in zip(d, (nx, ny, nz)))
        sl_b = tuple(slice(max(0, k), n - max(0, -k)) for k, n in zip(d, (nx, ny, nz)))
        us.append(idx[sl_a].ravel())
        vs.append(idx[sl_b].ravel())
    u, v = np.concatenate(us), np.concatenate(vs)
    c = _weights(rng, u.size, base)
    coords = np.column_stack(np.unravel_index(np.arange(nx * ny * nz), (nx, ny, nz)))
    n = nx * ny * nz
    u, v, c, s, t = _attach(n, u, v, c, coords, terminals, rng, base, alpha_scale)
    return WeightedGraph.from_arrays(n + 2, u, v, c, s, t)


def random_geometric(n: int, radius: float | None = None, base: float = 1.0,
                     terminals: str = "weighted", seed: int = 0,
                     alpha_scale: float = 2.0) -> WeightedGraph:
    """``n`` uniform points in the unit square joined when closer than ``radius``.

    The radius starts at ``sqrt(2 log n / (pi n))`` unless given and grows by
    10% until the point graph is connected.
    """
    n = _check_positive_int("n", n, minimum=2)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, 1.0, (n, 2))
    r = float(radius) if radius is not None else float(np.sqrt(2 * np.log(n) / (np.pi * n)))
    if not r > 0:
        raise InvalidParams("radius must be positive")
    tree = cKDTree(pts)
    for _ in range(MAX_RADIUS_RETRIES):
        pairs = tree.query_pairs(r, output_type="ndarray")
        if pairs.size and _connected(n, pairs[:, 0], pairs[:, 1]):
            break
        r *= 1.1
    else:
        raise InvalidParams(f"no connected geometric graph after {MAX_RADIUS_RETRIES} retries")
    u, v = pairs[:, 0].astype(np.int64), pairs[:, 1].astype(np.int64)
    c = _weights(rng, u.size, base)
    u, v, c, s, t = _attach(n, u, v, c, pts, terminals, rng, base, alpha_scale)
    return WeightedGraph.from_arrays(n + 2, u, v, c, s, t)


def _connected(n, u, v):
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    A = coo_matrix((np.ones(u.size), (u, v)), shape=(n, n))
    return connected_components(A, directed=False)[0] == 1


def path(n: int, base: float = 1.0, seed: int = 0, perturb: bool = True) -> WeightedGraph:
    """Path ``0 - 1 - ... - n-1`` with ``s = 0`` and ``t = n - 1``.

    With ``perturb=False`` every weight equals ``base``.
    """
    n = _check_positive_int("n", n, minimum=2)
    rng = np.random.default_rng(seed)
    u = np.arange(n - 1)
    c = _weights(rng, n - 1, base) if perturb else np.full(n - 1, float(base))
    return WeightedGraph.from_arrays(n, u, u + 1, c, 0, n - 1)


_BUILDERS = {
    "grid2d": (grid2d, ("rows", "cols")),
    "grid3d_26conn": (grid3d_26conn, ("nx", "ny", "nz")),
    "random_geometric": (random_geometric, ("n",)),
    "path": (path, ("n",)),
}


def generate_instance(kind: str, params: dict, seed: int = 0,
                      out: str | Path | None = None) -> WeightedGraph:
    """Build an instance by name, optionally writing it to ``out``."""
    if kind not in _BUILDERS:
        raise InvalidParams(f"unknown instance kind {kind!r}; choose from {KINDS}")
    fn, required = _BUILDERS[kind]
    missing = [k for k in required if k not in params]
    if missing:
        raise InvalidParams(f"{kind} needs parameters {missing}")
    try:
        g = fn(**params, seed=seed)
    except TypeError as exc:
        raise InvalidParams(str(exc)) from None
    if out is not None:
        write_graph(g, out)
    return g
