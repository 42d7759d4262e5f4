"""Column-structured grid DAG and its shortest-path solvers.

The graph is a U x V node grid.  Rows are numbered 1 (bottom) to V (top);
columns 1 to U.  Every edge connects a node on row v to a node on row v+1
whose column differs by at most ``k`` (clipped at the grid boundary), so a
node has at most 2k+1 incoming edges.  Traversal always runs bottom to top,
and the cost of an edge is the cost of the node it enters, taken from a
per-node cost grid.

``solve_dp`` fills a cumulative-cost / backpointer table for every node in
one bottom-up sweep (optionally with a quadratic penalty on horizontal
movement).  ``solve_dijkstra``, ``solve_floyd_warshall`` and
``solve_bruteforce`` solve the same problem with general-purpose algorithms
and exist for cross-validation and benchmarking.

Arrays indexed ``[v-1][u-1]`` hold per-node values: row index 0 is the
bottom row.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ApSpaceLimitError, GraphStructureError, PathEnumerationLimitError

Node = tuple[int, int]

#: Node count above which the all-pairs solver refuses to allocate its
#: quadratic table (64*64 grid by default).
DEFAULT_ALL_PAIRS_NODE_CAP = 4096

#: Default cap on the number of paths ``solve_bruteforce`` will enumerate.
DEFAULT_PATH_CAP = 1_000_000


@dataclass(frozen=True)
class ColumnarGraph:
    """Grid DAG with per-node entry costs.

    Attributes:
        width: number of columns U (>= 1).
        height: number of rows V (>= 2).
        k: branch radius; a step may move at most k columns sideways.
        node_costs: (V, U) float array, ``node_costs[v-1, u-1]`` is the cost
            charged when a path enters node (u, v).  Row 0 is the bottom row.
    """

    width: int
    height: int
    k: int
    node_costs: np.ndarray = field(repr=False)

    @property
    def node_count(self) -> int:
        return self.width * self.height

    @property
    def edge_count(self) -> int:
        U, k = self.width, self.k
        per_transition = sum(
            min(u + k, U) - max(u - k, 1) + 1 for u in range(1, U + 1)
        )
        return per_transition * (self.height - 1)

    def node_index(self, node: Node) -> int:
        """Flat index of 1-based node (u, v)."""
        u, v = node
        self._check_node(node)
        return (v - 1) * self.width + (u - 1)

    def node_cost(self, node: Node) -> float:
        u, v = node
        self._check_node(node)
        return float(self.node_costs[v - 1, u - 1])

    def has_edge(self, start: Node, end: Node) -> bool:
        (s, t), (i, j) = start, end
        self._check_node(start)
        self._check_node(end)
        return t == j - 1 and abs(i - s) <= self.k

    def edge_cost(self, start: Node, end: Node) -> float:
        """Cost of the directed edge from ``start`` up to ``end``.

        Equals the entered node's grid value.  Raises if the node pair is
        not connected.
        """
        if not self.has_edge(start, end):
            raise GraphStructureError(f"no edge from {start} to {end}")
        return float(self.node_costs[end[1] - 1, end[0] - 1])

    def predecessors(self, node: Node) -> list[Node]:
        """Nodes on the previous row with an edge into ``node``."""
        u, v = node
        self._check_node(node)
        if v == 1:
            return []
        lo = max(u - self.k, 1)
        hi = min(u + self.k, self.width)
        return [(s, v - 1) for s in range(lo, hi + 1)]

    def iter_edges(self):
        """Yield every edge as ``(start, end, cost)``."""
        for v in range(1, self.height):
            for u in range(1, self.width + 1):
                for end in range(max(u - self.k, 1), min(u + self.k, self.width) + 1):
                    yield (u, v), (end, v + 1), float(self.node_costs[v, end - 1])

    def top_row(self) -> list[Node]:
        """The destination set: all nodes on row V."""
        return [(u, self.height) for u in range(1, self.width + 1)]

    def _check_node(self, node: Node) -> None:
        u, v = node
        if not (1 <= u <= self.width and 1 <= v <= self.height):
            raise GraphStructureError(
                f"node {node} outside grid {self.width}x{self.height}"
            )


def build_graph(cost_grid, k: int) -> ColumnarGraph:
    """Build a grid DAG whose edge costs are the entered node's grid value.

    Args:
        cost_grid: (V, U) array-like of non-negative finite costs, bottom
            row first.
        k: branch radius, 0 <= k < U.

    Raises:
        GraphStructureError: grid smaller than 1x2, negative or non-finite
            costs, or k out of range.
    """
    grid = np.asarray(cost_grid, dtype=np.float64)
    if grid.ndim != 2:
        raise GraphStructureError(f"cost grid must be 2-D, got shape {grid.shape}")
    V, U = grid.shape
    if U < 1 or V < 2:
        raise GraphStructureError(f"grid must be at least 1 column x 2 rows, got {U}x{V}")
    if not np.all(np.isfinite(grid)):
        raise GraphStructureError("cost grid contains non-finite values")
    if np.any(grid < 0):
        raise GraphStructureError("cost grid contains negative values")
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise GraphStructureError(f"branch radius must be a non-negative integer, got {k!r}")
    if k >= U:
        raise GraphStructureError(f"branch radius {k} must be smaller than grid width {U}")
    grid = np.ascontiguousarray(grid)
    grid.setflags(write=False)
    return ColumnarGraph(width=U, height=V, k=int(k), node_costs=grid)


@dataclass(frozen=True)
class PathTable:
    """Cumulative-cost and backpointer grids produced by ``solve_dp``.

    ``costs[v-1, u-1]`` is the minimum cumulative cost of any feasible path
    from the bottom row to node (u, v); zero on the bottom row.
    ``parent_cols[v-1, u-1]`` is the 1-based column of the predecessor on
    row v-1 (0 on the bottom row, which has no predecessor).
    """

    costs: np.ndarray = field(repr=False)
    parent_cols: np.ndarray = field(repr=False)
    k: int
    movement_penalty: float

    @property
    def width(self) -> int:
        return self.costs.shape[1]

    @property
    def height(self) -> int:
        return self.costs.shape[0]

    def cost(self, node: Node) -> float:
        u, v = node
        return float(self.costs[v - 1, u - 1])

    def parent(self, node: Node) -> Node | None:
        u, v = node
        if v == 1:
            return None
        return (int(self.parent_cols[v - 1, u - 1]), v - 1)

    def top_costs(self) -> np.ndarray:
        """Cumulative costs of the top row, one per destination column."""
        return self.costs[-1].copy()


@dataclass(frozen=True)
class Path:
    """A bottom-to-top traversal, one node per row."""

    nodes: tuple[Node, ...]
    total_cost: float

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def columns(self) -> tuple[int, ...]:
        return tuple(u for u, _ in self.nodes)

    def lateral_steps(self) -> list[int]:
        cols = self.columns
        return [cols[i + 1] - cols[i] for i in range(len(cols) - 1)]

    def squared_movement(self) -> int:
        """Sum of squared per-step column moves."""
        return sum(j * j for j in self.lateral_steps())


def _step_preference(k: int) -> list[int]:
    """Column offsets in tie-break order: smallest |j| first, negative before
    positive among equal |j|."""
    order = [0]
    for m in range(1, k + 1):
        order.append(-m)
        order.append(m)
    return order


def solve_dp(graph: ColumnarGraph, movement_penalty: float = 0.0) -> PathTable:
    """Fill the cumulative-cost table with one bottom-up sweep.

    For every node the solver takes the cheapest predecessor on the row
    below, adding ``movement_penalty * j**2`` for a step that moves j
    columns sideways.  With ``movement_penalty=0`` this is the plain
    minimum-cumulative-cost recurrence.  Ties prefer the smallest |j| and,
    among equal |j|, the leftward step, so output is deterministic.

    Complexity is O(k * U * V) time and O(U * V) space.  The sweep is kept
    as a scalar loop: each inner step does constant work, so measured time
    tracks the node count linearly across grid sizes.
    """
    lam = float(movement_penalty)
    if not math.isfinite(lam) or lam < 0:
        raise ValueError(f"movement penalty must be finite and >= 0, got {movement_penalty!r}")
    U, V, k = graph.width, graph.height, graph.k
    cost_rows: list[list[float]] = graph.node_costs.tolist()
    # Offsets are visited in tie-break order.  j = 0 carries no penalty, so
    # it seeds the row via plain copies; each remaining offset then sweeps
    # the row once, overwriting only on strict improvement, which keeps the
    # first (most preferred) minimum.
    offsets = _step_preference(k)[1:]
    penalties = [lam * j * j for j in offsets]
    straight_par = list(range(1, U + 1))

    prev = [0.0] * U
    cost_out: list[list[float]] = [prev]
    parent_out: list[list[int]] = [[0] * U]
    for v in range(1, V):
        enter = cost_rows[v]
        best = prev[:]
        par = straight_par[:]
        for j, pen in zip(offsets, penalties):
            # predecessor column s = u - j must stay inside [0, U)
            if j > 0:
                targets = range(j, U)
                sources = prev[: U - j]
            else:
                targets = range(0, U + j)
                sources = prev[-j:]
            for u, source_cost in zip(targets, sources):
                cand = source_cost + pen
                if cand < best[u]:
                    best[u] = cand
                    par[u] = u - j + 1
        cur = [b + e for b, e in zip(best, enter)]
        cost_out.append(cur)
        parent_out.append(par)
        prev = cur

    return PathTable(
        costs=np.array(cost_out, dtype=np.float64),
        parent_cols=np.array(parent_out, dtype=np.int32),
        k=k,
        movement_penalty=lam,
    )


def trace_path(table: PathTable, dest: Node) -> Path:
    """Follow backpointers from a top-row destination down to the bottom row."""
    u, v = dest
    if v != table.height:
        raise ValueError(f"destination {dest} is not on the top row (row {table.height})")
    if not (1 <= u <= table.width):
        raise ValueError(f"destination column {u} outside [1, {table.width}]")
    nodes = [dest]
    node = dest
    while (parent := table.parent(node)) is not None:
        nodes.append(parent)
        node = parent
    nodes.reverse()
    return Path(nodes=tuple(nodes), total_cost=table.cost(dest))


def dijkstra_table(graph: ColumnarGraph) -> tuple[np.ndarray, np.ndarray]:
    """Binary-heap shortest-path sweep over the whole grid.

    A virtual source is connected at zero cost to every bottom-row node
    (realised as multi-source initialisation), so the returned (V, U)
    distance grid matches ``solve_dp`` with no movement penalty.  Also
    returns a (V, U) grid of 1-based predecessor columns (0 = none).
    """
    U, V, k = graph.width, graph.height, graph.k
    n = U * V
    cost_rows = graph.node_costs.tolist()
    dist = [math.inf] * n
    pred = [0] * n
    heap: list[tuple[float, int]] = []
    for u in range(U):
        dist[u] = 0.0
        heap.append((0.0, u))
    heapq.heapify(heap)
    pop = heapq.heappop
    push = heapq.heappush
    while heap:
        d, idx = pop(heap)
        if d > dist[idx]:
            continue
        v = idx // U
        if v + 1 >= V:
            continue
        u = idx - v * U
        enter = cost_rows[v + 1]
        base = (v + 1) * U
        for i in range(max(u - k, 0), min(u + k, U - 1) + 1):
            nd = d + enter[i]
            ni = base + i
            if nd < dist[ni]:
                dist[ni] = nd
                pred[ni] = u + 1
                push(heap, (nd, ni))
    dist_grid = np.array(dist, dtype=np.float64).reshape(V, U)
    pred_grid = np.array(pred, dtype=np.int32).reshape(V, U)
    return dist_grid, pred_grid


def solve_dijkstra(graph: ColumnarGraph, dest: Node) -> Path:
    """Minimum-cost path to one top-row destination via Dijkstra's algorithm."""
    u, v = dest
    if v != graph.height:
        raise ValueError(f"destination {dest} is not on the top row (row {graph.height})")
    graph._check_node(dest)
    dist, pred = dijkstra_table(graph)
    nodes = [dest]
    cur_u, cur_v = dest
    while cur_v > 1:
        cur_u = int(pred[cur_v - 1, cur_u - 1])
        cur_v -= 1
        nodes.append((cur_u, cur_v))
    nodes.reverse()
    return Path(nodes=tuple(nodes), total_cost=float(dist[v - 1, u - 1]))


@dataclass(frozen=True)
class AllPairsTable:
    """Dense all-pairs cost table over flat node indices."""

    costs: np.ndarray = field(repr=False)
    width: int
    height: int

    def cost(self, start: Node, end: Node) -> float:
        a = (start[1] - 1) * self.width + (start[0] - 1)
        b = (end[1] - 1) * self.width + (end[0] - 1)
        return float(self.costs[a, b])


def solve_floyd_warshall(
    graph: ColumnarGraph, node_cap: int = DEFAULT_ALL_PAIRS_NODE_CAP
) -> AllPairsTable:
    """All-pairs minimum costs by the classic triple loop (middle loop
    vectorised).  Needs an N x N table, so graphs above ``node_cap`` nodes
    are refused."""
    n = graph.node_count
    if n > node_cap:
        raise ApSpaceLimitError(
            f"{n} nodes exceed the all-pairs cap of {node_cap}; "
            "the quadratic table would be impractical"
        )
    U, V, k = graph.width, graph.height, graph.k
    dist = np.full((n, n), np.inf, dtype=np.float64)
    np.fill_diagonal(dist, 0.0)
    for v in range(V - 1):
        for u in range(U):
            a = v * U + u
            lo, hi = max(u - k, 0), min(u + k, U - 1)
            base = (v + 1) * U
            for i in range(lo, hi + 1):
                dist[a, base + i] = graph.node_costs[v + 1, i]
    for m in range(n):
        np.minimum(dist, dist[:, m : m + 1] + dist[m : m + 1, :], out=dist)
    return AllPairsTable(costs=dist, width=U, height=V)


def count_paths(graph: ColumnarGraph, dest: Node) -> int:
    """Number of feasible bottom-to-top paths ending at ``dest``."""
    graph._check_node(dest)
    U, k = graph.width, graph.k
    counts = [1] * U
    for _ in range(dest[1] - 1):
        counts = [
            sum(counts[s] for s in range(max(u - k, 0), min(u + k, U - 1) + 1))
            for u in range(U)
        ]
    return counts[dest[0] - 1]


def solve_bruteforce(
    graph: ColumnarGraph, dest: Node, path_cap: int = DEFAULT_PATH_CAP
) -> Path:
    """Exhaustively enumerate every feasible path to ``dest`` and keep the
    cheapest.  Exists as a slow, obviously-correct cross-check.

    Raises:
        PathEnumerationLimitError: more than ``path_cap`` paths end at dest.
    """
    u, v = dest
    if v != graph.height:
        raise ValueError(f"destination {dest} is not on the top row (row {graph.height})")
    graph._check_node(dest)
    n_paths = count_paths(graph, dest)
    if n_paths > path_cap:
        raise PathEnumerationLimitError(
            f"{n_paths} paths to {dest} exceed the enumeration cap of {path_cap}"
        )
    U, k = graph.width, graph.k
    cost_rows = graph.node_costs.tolist()

    best_cost = math.inf
    best_cols: list[int] | None = None
    # Depth-first over predecessor choices, walking from dest down to row 1.
    # stack holds (column, row, cost of the partial path from this node up
    # to dest, columns collected so far top-down).
    stack: list[tuple[int, int, float, list[int]]] = [(u - 1, v - 1, 0.0, [u - 1])]
    while stack:
        cu, cv, acc, cols = stack.pop()
        if cv == 0:
            if acc < best_cost:
                best_cost = acc
                best_cols = cols
            continue
        step_cost = acc + cost_rows[cv][cu]
        for s in range(max(cu - k, 0), min(cu + k, U - 1) + 1):
            stack.append((s, cv - 1, step_cost, cols + [s]))
    assert best_cols is not None
    nodes = tuple((c + 1, v - i) for i, c in enumerate(best_cols))[::-1]
    return Path(nodes=nodes, total_cost=best_cost)


def write_grid_fixture(path, cost_grid, k: int) -> None:
    """Write a cost grid as plain text: ``U V k`` header then V rows of U
    space-separated costs, bottom row first."""
    grid = np.asarray(cost_grid, dtype=np.float64)
    V, U = grid.shape
    lines = [f"{U} {V} {k}"]
    for row in grid:
        lines.append(" ".join(repr(float(x)) for x in row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_grid_fixture(path) -> tuple[np.ndarray, int]:
    """Read a grid written by ``write_grid_fixture``; returns (grid, k)."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: expected header 'U V k'")
        U, V, k = (int(x) for x in header)
        grid = np.loadtxt(fh, dtype=np.float64, ndmin=2)
    if grid.shape != (V, U):
        raise ValueError(f"{path}: body shape {grid.shape} does not match header {U}x{V}")
    return grid, k
