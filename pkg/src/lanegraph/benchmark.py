"""Timing and scaling comparisons between the path solvers.

Each benchmark run times one solver on one random grid, one CSV row per
repetition.  Memory figures are analytic peak estimates of the dominant
allocations (the tables each solver must hold), not measurements: the point
is the asymptotic story — the sweep and heap solvers carry O(UV) state, the
all-pairs solver O((UV)^2) — without the noise of allocator introspection.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from .graph import ColumnarGraph, build_graph, dijkstra_table, solve_dp, solve_floyd_warshall

CSV_FIELDS = ("solver", "nodes", "edges", "k", "lambda", "time_ns", "mem_bytes")

SOLVER_NAMES = ("dp", "dijkstra", "floyd_warshall")


@dataclass(frozen=True)
class BenchmarkRecord:
    solver: str
    nodes: int
    edges: int
    k: int
    movement_penalty: float
    time_ns: int
    mem_bytes: int

    def as_row(self) -> list:
        return [
            self.solver,
            self.nodes,
            self.edges,
            self.k,
            repr(self.movement_penalty),
            self.time_ns,
            self.mem_bytes,
        ]


def estimate_peak_bytes(solver: str, width: int, height: int) -> int:
    """Dominant table sizes a solver must hold, in bytes.

    dp: float64 cost grid + int32 backpointer grid.
    dijkstra: distance and predecessor lists plus heap entries, all O(UV);
        a heap entry is taken as a 2-tuple of boxed values (~64 bytes).
    floyd_warshall: the dense float64 all-pairs table.
    """
    n = width * height
    if solver == "dp":
        return 12 * n
    if solver == "dijkstra":
        return 12 * n + 64 * n
    if solver == "floyd_warshall":
        return 8 * n * n
    raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVER_NAMES}")


def _run(solver: str, graph: ColumnarGraph, movement_penalty: float) -> None:
    if solver == "dp":
        solve_dp(graph, movement_penalty)
    elif solver == "dijkstra":
        dijkstra_table(graph)
    elif solver == "floyd_warshall":
        solve_floyd_warshall(graph)
    else:
        raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVER_NAMES}")


def benchmark_solvers(
    sizes,
    k: int = 3,
    movement_penalty: float = 0.0,
    solvers=("dp", "dijkstra"),
    repetitions: int = 3,
    seed: int = 0,
) -> list[BenchmarkRecord]:
    """Time each solver on one random grid per size.

    Args:
        sizes: iterable of grid sizes; an int n means an n x n grid, a
            (width, height) pair is used as-is.
        k: branch radius for every grid.
        movement_penalty: passed to the sweep solver (the others ignore it —
            they solve the unregularised problem).
        solvers: subset of ``SOLVER_NAMES``.  The all-pairs solver keeps its
            node cap, so only request it for sizes it accepts.
        repetitions: timed runs per (size, solver); one record each.
        seed: grids are drawn from ``default_rng(seed)`` so a sweep is
            reproducible.

    Returns:
        Records in sweep order (sizes outer, solvers inner).
    """
    rng = np.random.default_rng(seed)
    records: list[BenchmarkRecord] = []
    for size in sizes:
        width, height = (size, size) if isinstance(size, (int, np.integer)) else size
        graph = build_graph(rng.random((height, width)), k)
        for solver in solvers:
            mem = estimate_peak_bytes(solver, width, height)
            for _ in range(repetitions):
                start = time.perf_counter_ns()
                _run(solver, graph, movement_penalty)
                elapsed = time.perf_counter_ns() - start
                records.append(
                    BenchmarkRecord(
                        solver=solver,
                        nodes=graph.node_count,
                        edges=graph.edge_count,
                        k=k,
                        movement_penalty=movement_penalty,
                        time_ns=elapsed,
                        mem_bytes=mem,
                    )
                )
    return records


def write_benchmark_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for rec in records:
            writer.writerow(rec.as_row())


def median_times(records, solver: str) -> dict[int, float]:
    """Median time_ns per node count for one solver."""
    by_nodes: dict[int, list[int]] = {}
    for rec in records:
        if rec.solver == solver:
            by_nodes.setdefault(rec.nodes, []).append(rec.time_ns)
    return {n: float(np.median(ts)) for n, ts in sorted(by_nodes.items())}


def scaling_exponent(records, solver: str) -> float:
    """Least-squares slope of log(median time) against log(nodes).

    A value near 1 means time grows linearly with node count.
    """
    med = median_times(records, solver)
    if len(med) < 2:
        raise ValueError(f"need at least two sizes to fit a slope, got {len(med)}")
    x = np.log(np.array(list(med.keys()), dtype=float))
    y = np.log(np.array(list(med.values()), dtype=float))
    return float(np.polyfit(x, y, 1)[0])
