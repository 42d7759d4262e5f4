"""Lane extraction: iterate minimum-cost paths over the cost grid, fit each
with a robust parabola, and keep the convincing ones.

Coordinates: fits and lane models live in bird's-eye raster coordinates —
v is the 0-based row (0 = far edge), u the 0-based column, and a lane is
u = b2 v^2 + b1 v + b0.  The path solver's grid is the same raster flipped
upside down (graph row 1 = nearest row), so traced paths are converted
before fitting.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import RansacNoConsensusError
from .features import FeatureMaps, FusionWeights, compute_features, cost_grid
from .features import image_to_graph_orientation
from .features import DEFAULT_HIGH_THRESHOLD, DEFAULT_LOW_THRESHOLD, DEFAULT_SIGMA
from .geometry import CameraModel, IpmGrid, project_lane_to_image, warp_to_ipm
from .graph import Path, build_graph, solve_dp, trace_path

#: Minimum consensus size for a robust fit to count as a model at all.
MIN_CONSENSUS = 3

#: Default stopping threshold per path step: a surviving path must average
#: below this cost per row, i.e. clearly cheaper than featureless ground.
DEFAULT_STOP_COST_PER_STEP = 0.55


@dataclass(frozen=True)
class ExtractionConfig:
    """Knobs for the path-selection loop.

    ``stop_cost`` (the loop guard on cumulative path cost) defaults to
    ``DEFAULT_STOP_COST_PER_STEP * (rows - 1)`` at solve time when left
    None, since it scales with grid height.

    ``duplicate_separation`` is the column distance within which a path
    sample counts as evidence for an already-accepted lane; a candidate
    whose inliers mostly (> 1/2) fall that close to some accepted curve is
    rejected as a re-detection of the same marking.
    """

    movement_penalty: float = 2.0
    branch_radius: int = 3
    residual_threshold: float = 5.0
    stop_cost: float | None = None
    max_lanes: int = 4
    suppression_halfwidth: int = 8
    min_inlier_ratio: float = 0.8
    ransac_iterations: int = 200
    seed: int = 0
    duplicate_separation: float = 5.0

    def __post_init__(self):
        if not (math.isfinite(self.movement_penalty) and self.movement_penalty >= 0):
            raise ValueError(f"movement penalty must be >= 0, got {self.movement_penalty}")
        if not (isinstance(self.branch_radius, int) and self.branch_radius >= 1):
            raise ValueError(f"branch radius must be a positive integer, got {self.branch_radius}")
        if not (math.isfinite(self.residual_threshold) and self.residual_threshold > 0):
            raise ValueError(f"residual threshold must be positive, got {self.residual_threshold}")
        if self.stop_cost is not None and not (
            math.isfinite(self.stop_cost) and self.stop_cost > 0
        ):
            raise ValueError(f"stop cost must be positive, got {self.stop_cost}")
        if not (isinstance(self.max_lanes, int) and self.max_lanes >= 1):
            raise ValueError(f"max lanes must be a positive integer, got {self.max_lanes}")
        if not (isinstance(self.suppression_halfwidth, int) and self.suppression_halfwidth >= 1):
            raise ValueError(
                f"suppression half-width must be a positive integer, got {self.suppression_halfwidth}"
            )
        if not (0 < self.min_inlier_ratio <= 1):
            raise ValueError(f"min inlier ratio must lie in (0, 1], got {self.min_inlier_ratio}")
        if not (isinstance(self.ransac_iterations, int) and self.ransac_iterations >= 1):
            raise ValueError(f"iteration count must be positive, got {self.ransac_iterations}")
        if not (math.isfinite(self.duplicate_separation) and self.duplicate_separation > 0):
            raise ValueError(
                f"duplicate separation must be positive, got {self.duplicate_separation}"
            )

    def resolve_stop_cost(self, rows: int) -> float:
        if self.stop_cost is not None:
            return self.stop_cost
        return DEFAULT_STOP_COST_PER_STEP * (rows - 1)


@dataclass(frozen=True)
class LaneModel:
    """One accepted lane: parabola u = b2 v^2 + b1 v + b0 over bird's-eye
    raster coordinates, plus the evidence that earned acceptance."""

    beta2: float
    beta1: float
    beta0: float
    inlier_count: int
    inlier_ratio: float
    path_cost: float
    dest_column: int = -1

    def __post_init__(self):
        if not (0.0 <= self.inlier_ratio <= 1.0):
            raise ValueError(f"inlier ratio must lie in [0, 1], got {self.inlier_ratio}")
        if self.inlier_count < 0:
            raise ValueError(f"inlier count must be >= 0, got {self.inlier_count}")

    @property
    def coefficients(self) -> tuple[float, float, float]:
        return (self.beta2, self.beta1, self.beta0)

    def column_at(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        return self.beta2 * v**2 + self.beta1 * v + self.beta0


@dataclass(frozen=True)
class PipelineArrays:
    """Intermediate rasters of one detection run, kept for debugging."""

    ipm: np.ndarray = field(repr=False)
    features: FeatureMaps = field(repr=False)
    cost_raster: np.ndarray = field(repr=False)
    cost_graph: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class DetectionResult:
    """Accepted lanes in acceptance order, with polylines ready to draw.

    ``ipm_polylines[i]`` holds (u, v) raster samples of lane i at every
    raster row, generated from the fitted coefficients.
    ``image_polylines`` are the same curves in source-image pixels; None
    when extraction ran without a camera.  ``timings`` maps pipeline stage
    to seconds.
    """

    lanes: tuple[LaneModel, ...]
    ipm_polylines: tuple[np.ndarray, ...]
    image_polylines: tuple[np.ndarray, ...] | None
    rejected_paths: int
    timings: dict[str, float] = field(default_factory=dict)
    intermediates: PipelineArrays | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.ipm_polylines) != len(self.lanes):
            raise ValueError("one raster polyline required per lane")
        if self.image_polylines is not None and len(self.image_polylines) != len(self.lanes):
            raise ValueError("one image polyline required per lane")


def _raster_samples(path_or_samples) -> tuple[np.ndarray, np.ndarray]:
    """Normalize input to (v, u) float arrays in raster coordinates.

    A ``Path`` (1-based grid nodes, bottom row first) flips to raster rows
    counted from the far edge; anything else must be a (v, u) array pair.
    """
    if isinstance(path_or_samples, Path):
        rows = len(path_or_samples)
        v = np.array([rows - node_v for _, node_v in path_or_samples.nodes], dtype=np.float64)
        u = np.array([node_u - 1 for node_u, _ in path_or_samples.nodes], dtype=np.float64)
        return v, u
    v, u = path_or_samples
    v = np.asarray(v, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if v.shape != u.shape or v.ndim != 1:
        raise ValueError(f"expected matching 1-D sample arrays, got {v.shape} and {u.shape}")
    return v, u


def fit_parabola_ls(path_or_samples) -> np.ndarray:
    """Least-squares parabola through the samples: returns (b2, b1, b0) for
    u = b2 v^2 + b1 v + b0.

    Raises:
        ValueError: fewer than 3 distinct v values (the normal equations
            are rank-deficient).
    """
    v, u = _raster_samples(path_or_samples)
    if np.unique(v).size < MIN_CONSENSUS:
        raise ValueError("parabola fit needs at least 3 samples with distinct rows")
    return np.polyfit(v, u, 2)


def _exact_parabola(v3: np.ndarray, u3: np.ndarray) -> np.ndarray | None:
    A = np.column_stack([v3**2, v3, np.ones(3)])
    try:
        return np.linalg.solve(A, u3)
    except np.linalg.LinAlgError:
        return None


def fit_parabola_ransac(
    path_or_samples,
    residual_threshold: float = 5.0,
    iterations: int = 200,
    seed=0,
) -> tuple[np.ndarray, np.ndarray]:
    """Consensus-maximal parabola under squared-residual threshold.

    Each round samples 3 rows, interpolates them exactly, and counts the
    samples with (u - f(v))^2 strictly below the threshold.  The best
    consensus wins (earlier rounds keep ties), then a least-squares re-fit
    over the winning inliers replaces the sampled model unless that would
    shrink the consensus, in which case the sampled model is retained.

    Args:
        path_or_samples: traced ``Path`` or (v, u) arrays.
        residual_threshold: px^2 bound on the squared residual.
        iterations: sampling rounds.
        seed: int seed or a ``numpy.random.Generator`` to draw from.

    Returns:
        (coefficients, inlier mask) — mask is over the input samples in
        order, under the returned coefficients.

    Raises:
        RansacNoConsensusError: no sampled model gathered 3 inliers.
        ValueError: bad threshold, too few samples, or fewer than 3
            distinct rows (every triple would be degenerate).
    """
    if residual_threshold <= 0:
        raise ValueError(f"residual threshold must be positive, got {residual_threshold}")
    v, u = _raster_samples(path_or_samples)
    n = v.size
    if n < MIN_CONSENSUS:
        raise ValueError(f"robust fit needs at least {MIN_CONSENSUS} samples, got {n}")
    if np.unique(v).size < MIN_CONSENSUS:
        raise ValueError("robust fit needs at least 3 distinct rows")
    rng = np.random.default_rng(seed)

    best_count = 0
    best_beta: np.ndarray | None = None
    best_mask: np.ndarray | None = None
    for _ in range(iterations):
        idx = rng.choice(n, size=3, replace=False)
        v3, u3 = v[idx], u[idx]
        if v3[0] == v3[1] or v3[0] == v3[2] or v3[1] == v3[2]:
            continue  # degenerate in v: no parabola through the triple
        beta = _exact_parabola(v3, u3)
        if beta is None:
            continue
        resid = u - (beta[0] * v**2 + beta[1] * v + beta[2])
        mask = resid**2 < residual_threshold
        count = int(mask.sum())
        if count > best_count:
            best_count = count
            best_beta = beta
            best_mask = mask

    if best_beta is None or best_count < MIN_CONSENSUS:
        raise RansacNoConsensusError(
            f"no sampled parabola reached {MIN_CONSENSUS} inliers in {iterations} rounds"
        )

    if np.unique(v[best_mask]).size >= MIN_CONSENSUS:
        refit = np.polyfit(v[best_mask], u[best_mask], 2)
        resid = u - (refit[0] * v**2 + refit[1] * v + refit[2])
        refit_mask = resid**2 < residual_threshold
        if int(refit_mask.sum()) >= best_count:
            return refit, refit_mask
    return best_beta, best_mask


def extract_lanes(graph_cost_grid, cfg: ExtractionConfig | None = None) -> DetectionResult:
    """Run the selection loop over a cost grid in graph orientation
    (row index 0 = nearest row = graph row 1).

    Solves the cumulative-cost table once, then repeatedly takes the
    cheapest unsuppressed top-row destination (ties to the left), traces
    its path, fits it robustly, accepts it when the inlier share clears
    the configured minimum and the fitted curve is not a duplicate of an
    already-accepted lane, and suppresses the destination's neighborhood
    either way.  Stops when the best remaining cost exceeds the stopping
    threshold or the lane budget is reached; an iteration cap of
    ceil(U / (2 w_s + 1)) + max_lanes bounds the loop even in pathological
    configurations.

    Returns a DetectionResult without image polylines (no camera here).
    """
    if cfg is None:
        cfg = ExtractionConfig()
    t0 = time.perf_counter()
    grid = np.asarray(graph_cost_grid, dtype=np.float64)
    graph = build_graph(grid, cfg.branch_radius)
    table = solve_dp(graph, cfg.movement_penalty)
    t_solve = time.perf_counter()

    V, U = grid.shape
    stop_cost = cfg.resolve_stop_cost(V)
    rng = np.random.default_rng(cfg.seed)
    working = table.top_costs()
    window = 2 * cfg.suppression_halfwidth + 1
    max_iterations = math.ceil(U / window) + cfg.max_lanes

    lanes: list[LaneModel] = []
    polylines: list[np.ndarray] = []
    rejected = 0
    rows = np.arange(V, dtype=np.float64)
    for _ in range(max_iterations):
        if len(lanes) >= cfg.max_lanes:
            break
        dest = int(np.argmin(working))
        best_cost = float(working[dest])
        if not math.isfinite(best_cost) or best_cost > stop_cost:
            break
        path = trace_path(table, (dest + 1, V))
        try:
            beta, mask = fit_parabola_ransac(
                path, cfg.residual_threshold, cfg.ransac_iterations, rng
            )
            count = int(mask.sum())
            ratio = count / V
            if ratio >= cfg.min_inlier_ratio:
                lane = LaneModel(
                    beta2=float(beta[0]),
                    beta1=float(beta[1]),
                    beta0=float(beta[2]),
                    inlier_count=count,
                    inlier_ratio=ratio,
                    path_cost=best_cost,
                    dest_column=dest,
                )
                # Destinations outside the suppressed window can still feed
                # paths that ride an already-claimed low-cost ridge and only
                # veer off near the start row; the robust fit discards the
                # veering tail, so the survivor is the same physical marking
                # wearing a slightly tilted curve.  Flag it by support: when
                # most of a candidate's inliers sit within a marking's width
                # of an accepted lane, the evidence is already spoken for.
                pv, pu = _raster_samples(path)
                iv, iu = pv[mask], pu[mask]
                claimed = any(
                    np.mean(np.abs(iu - prior.column_at(iv)) < cfg.duplicate_separation) > 0.5
                    for prior in lanes
                )
                if claimed:
                    rejected += 1
                else:
                    lanes.append(lane)
                    polylines.append(np.column_stack([lane.column_at(rows), rows]))
            else:
                rejected += 1
        except RansacNoConsensusError:
            rejected += 1
        lo = max(dest - cfg.suppression_halfwidth, 0)
        working[lo : dest + cfg.suppression_halfwidth + 1] = math.inf

    return DetectionResult(
        lanes=tuple(lanes),
        ipm_polylines=tuple(polylines),
        image_polylines=None,
        rejected_paths=rejected,
        timings={
            "solve": t_solve - t0,
            "select": time.perf_counter() - t_solve,
        },
    )


def detect(
    image,
    cam: CameraModel,
    grid: IpmGrid | None = None,
    weights: FusionWeights | None = None,
    cfg: ExtractionConfig | None = None,
    low: float = DEFAULT_LOW_THRESHOLD,
    high: float = DEFAULT_HIGH_THRESHOLD,
    sigma: float = DEFAULT_SIGMA,
    keep_intermediates: bool = False,
) -> DetectionResult:
    """Full pipeline on one camera image: bird's-eye warp, feature fusion,
    cost grid, path extraction, and back-projection of the accepted lanes
    into source-image pixels.

    Set ``keep_intermediates`` to carry the warped raster, feature maps,
    and both cost-grid orientations on the result for inspection dumps.
    """
    if grid is None:
        grid = IpmGrid()
    if cfg is None:
        cfg = ExtractionConfig()
    t0 = time.perf_counter()
    ipm = warp_to_ipm(np.asarray(image), cam, grid)
    ipm_u8 = np.clip(np.rint(ipm), 0, 255).astype(np.uint8)
    t_warp = time.perf_counter()
    maps = compute_features(ipm_u8, weights, low=low, high=high, sigma=sigma)
    cost_raster = cost_grid(maps.fused)
    cost_graph = image_to_graph_orientation(cost_raster)
    t_features = time.perf_counter()
    result = extract_lanes(cost_graph, cfg)
    t_extract = time.perf_counter()
    image_polys = tuple(project_lane_to_image(lane, cam, grid) for lane in result.lanes)
    timings = {
        "warp": t_warp - t0,
        "features": t_features - t_warp,
        **result.timings,
        "project": time.perf_counter() - t_extract,
    }
    intermediates = None
    if keep_intermediates:
        intermediates = PipelineArrays(
            ipm=ipm_u8, features=maps, cost_raster=cost_raster, cost_graph=cost_graph
        )
    return DetectionResult(
        lanes=result.lanes,
        ipm_polylines=result.ipm_polylines,
        image_polylines=image_polys,
        rejected_paths=result.rejected_paths,
        timings=timings,
        intermediates=intermediates,
    )
