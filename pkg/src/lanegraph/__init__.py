"""Curve extraction on column-structured grid graphs.

Builds a DAG over a cost image whose rows can only be traversed bottom to
top, solves for minimum-cost paths by dynamic programming, and applies the
machinery to lane detection on inverse-perspective-mapped road images.
"""

from .config import RunConfig, read_run_config, write_run_config
from .errors import (
    ApSpaceLimitError,
    ConfigError,
    GeometryError,
    GraphStructureError,
    LaneGraphError,
    PathEnumerationLimitError,
    RansacNoConsensusError,
)
from .evaluate import (
    EvalSummary,
    FrameScore,
    max_lateral_deviation,
    score_frame,
    summarize,
)
from .extraction import (
    DetectionResult,
    ExtractionConfig,
    LaneModel,
    detect,
    extract_lanes,
    fit_parabola_ls,
    fit_parabola_ransac,
)
from .features import (
    FeatureMaps,
    FusionWeights,
    canny_edges,
    compute_features,
    cost_grid,
    fuse_features,
    image_to_graph_orientation,
    to_grayscale,
)
from .geometry import (
    CameraModel,
    IpmGrid,
    VanishingPoint,
    angles_from_vp,
    ipm_homography,
    project_lane_to_image,
    vanishing_point_of_direction,
    warp_to_ipm,
)
from .graph import (
    ColumnarGraph,
    Path,
    PathTable,
    build_graph,
    solve_bruteforce,
    solve_dijkstra,
    solve_dp,
    solve_floyd_warshall,
    trace_path,
)
from .synth import (
    SceneSpec,
    default_scene_camera,
    ground_parabola_to_ipm,
    random_scene_spec,
    render_scene,
    scene_ground_truth,
)

__version__ = "0.1.0"

__all__ = [
    "ApSpaceLimitError",
    "CameraModel",
    "ColumnarGraph",
    "ConfigError",
    "DetectionResult",
    "EvalSummary",
    "ExtractionConfig",
    "FeatureMaps",
    "FrameScore",
    "FusionWeights",
    "GeometryError",
    "GraphStructureError",
    "IpmGrid",
    "LaneGraphError",
    "LaneModel",
    "Path",
    "PathEnumerationLimitError",
    "PathTable",
    "RansacNoConsensusError",
    "RunConfig",
    "SceneSpec",
    "VanishingPoint",
    "angles_from_vp",
    "build_graph",
    "canny_edges",
    "compute_features",
    "cost_grid",
    "default_scene_camera",
    "detect",
    "extract_lanes",
    "fit_parabola_ls",
    "fit_parabola_ransac",
    "fuse_features",
    "ground_parabola_to_ipm",
    "image_to_graph_orientation",
    "ipm_homography",
    "max_lateral_deviation",
    "project_lane_to_image",
    "random_scene_spec",
    "read_run_config",
    "render_scene",
    "scene_ground_truth",
    "score_frame",
    "solve_bruteforce",
    "solve_dijkstra",
    "solve_dp",
    "solve_floyd_warshall",
    "summarize",
    "to_grayscale",
    "trace_path",
    "vanishing_point_of_direction",
    "warp_to_ipm",
    "write_run_config",
    "__version__",
]
