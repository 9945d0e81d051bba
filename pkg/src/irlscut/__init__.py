"""Parallel IRLS solver for undirected s-t min-cut.

The cut problem is written as l1 minimization over node voltages and
solved by iteratively reweighted least squares; every iteration is a
reduced Laplacian system handled by block-Jacobi preconditioned CG.  The
final voltages are rounded by a sweep cut or by a two-level scheme that
contracts confidently labelled nodes and solves the rest exactly.
"""
from .exceptions import (BlockCountExceedsNodes, BreakdownNonSpd, DegenerateClustering,
                         DimensionMismatch, DisconnectedGraph, InputError,
                         InvalidLabeling, InvalidParams, InvariantViolation,
                         IrlsCutError, NonPositiveCapacity, PatternChanged,
                         PreconditionerDimensionMismatch, SolverError,
                         SourceEqualsSink, TooLargeForEnumeration, ZeroOptimum,
                         ZeroPivot)
from .generate import generate_instance, grid2d, grid3d_26conn, path, random_geometric
from .graph import (SINK_SIDE, SOURCE_SIDE, IncidenceOperator, TerminalSplit,
                    WeightedGraph, cut_value, ingest, split_terminals)
from .io import read_graph, write_graph
from .irls import (IrlsConfig, IrlsTrace, ReducedSystem, assemble_reduced_system,
                   electrical_flow, flow_value, irls_run, joint_objective,
                   net_outflow, polarization, reweight, smoothed_objective)
from .linalg import (BlockJacobiPreconditioner, SparseSymmetricMatrix, WorkerPool,
                     factor_blocks, pcg_solve)
from .maxflow import brute_force_min_cut, max_flow
from .partition import Partition, apply_permutation, partition
from .pipeline import RunReport, SolverConfig, bench, solve
from .rounding import (CutResult, ThresholdPair, cluster_voltages, coarsen,
                       relative_approx_ratio, sweep_cut, two_level_round)
from .spectral import cheeger_check, lambda2

__version__ = "0.1.0"
