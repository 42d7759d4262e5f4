"""Run configuration: one INI file covering every pipeline stage.

Sections and keys map one-to-one onto the flat ``RunConfig`` dataclass:

    [camera]      fx, fy, cu, cv, image_width, image_height,
                  camera_height, pitch, yaw
    [ipm]         x_min, x_max, y_min, y_max, out_width, out_height
    [features]    edge_weight, gray_weight, low_threshold, high_threshold,
                  sigma
    [extraction]  movement_penalty, branch_radius, residual_threshold,
                  stop_cost ("auto" or a float), max_lanes,
                  suppression_halfwidth, min_inlier_ratio,
                  ransac_iterations, duplicate_separation
    [run]         seed, debug_dumps
    [bench]       sizes (comma-separated grid side lengths), k,
                  movement_penalty, repetitions, all_pairs_max_nodes

Every key is optional; missing keys keep their defaults, so an empty file
is a valid configuration.  Floats are written with ``repr`` so a written
file re-parses to exactly the same values.  Parsing collects *all*
problems — unknown keys, type errors, violated invariants — into a single
``ConfigError`` instead of stopping at the first.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass

from .errors import ConfigError
from .extraction import ExtractionConfig
from .features import FusionWeights
from .geometry import CameraModel, IpmGrid

__all__ = ["RunConfig", "read_run_config", "write_run_config"]


@dataclass(frozen=True)
class RunConfig:
    """Primitive-valued snapshot of one run's parameters.

    Kept deliberately flat (numbers, strings, bools only) so equality and
    file round-trips are trivially exact; the ``camera()`` / ``ipm_grid()``
    / ``fusion_weights()`` / ``extraction_config()`` factories build the
    validated domain objects on demand.

    The [features] defaults assume the narrow striping drawn by the bundled
    scene renderer (a roughly one-pixel line wants smoothing at its own
    scale, and a correspondingly lower gradient bar); photographic input
    with strong paint edges is usually better served by sigma 1.4 and
    thresholds 50/150.
    """

    # [camera]
    fx: float = 1400.0
    fy: float = 1400.0
    cu: float = 640.0
    cv: float = 480.0
    image_width: int = 1280
    image_height: int = 960
    camera_height: float = 1.5
    pitch: float = 0.04
    yaw: float = 0.0
    # [ipm]
    x_min: float = -6.0
    x_max: float = 6.0
    y_min: float = 5.0
    y_max: float = 35.0
    out_width: int = 240
    out_height: int = 600
    # [features]
    edge_weight: float = 0.6
    gray_weight: float = 0.4
    low_threshold: float = 30.0
    high_threshold: float = 60.0
    sigma: float = 1.0
    # [extraction]
    movement_penalty: float = 2.0
    branch_radius: int = 3
    residual_threshold: float = 5.0
    stop_cost: float | None = None
    max_lanes: int = 4
    suppression_halfwidth: int = 8
    min_inlier_ratio: float = 0.8
    ransac_iterations: int = 200
    duplicate_separation: float = 5.0
    # [run]
    seed: int = 0
    debug_dumps: bool = False
    # [bench]
    bench_sizes: tuple[int, ...] = (16, 32, 64, 128)
    bench_k: int = 3
    bench_movement_penalty: float = 0.0
    bench_repetitions: int = 3
    # The all-pairs solver is cubic in node count, so the sweep gives it a
    # far lower ceiling than the others; above this it is skipped, noted in
    # the output.  (The solver itself enforces a separate memory guard.)
    bench_all_pairs_max_nodes: int = 1024

    def camera(self) -> CameraModel:
        return CameraModel.from_params(
            self.fx,
            self.fy,
            self.cu,
            self.cv,
            self.image_width,
            self.image_height,
            self.camera_height,
            pitch=self.pitch,
            yaw=self.yaw,
        )

    def ipm_grid(self) -> IpmGrid:
        return IpmGrid(
            x_range=(self.x_min, self.x_max),
            y_range=(self.y_min, self.y_max),
            out_width=self.out_width,
            out_height=self.out_height,
        )

    def fusion_weights(self) -> FusionWeights:
        return FusionWeights(edge=self.edge_weight, gray=self.gray_weight)

    def extraction_config(self) -> ExtractionConfig:
        return ExtractionConfig(
            movement_penalty=self.movement_penalty,
            branch_radius=self.branch_radius,
            residual_threshold=self.residual_threshold,
            stop_cost=self.stop_cost,
            max_lanes=self.max_lanes,
            suppression_halfwidth=self.suppression_halfwidth,
            min_inlier_ratio=self.min_inlier_ratio,
            ransac_iterations=self.ransac_iterations,
            seed=self.seed,
            duplicate_separation=self.duplicate_separation,
        )


# (section, key, field name, parser) — the one place the file layout lives.
def _parse_int(text: str) -> int:
    return int(text.strip())


def _parse_float(text: str) -> float:
    return float(text.strip())


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_stop_cost(text: str) -> float | None:
    t = text.strip().lower()
    if t in ("auto", "none", ""):
        return None
    return float(t)


def _parse_sizes(text: str) -> tuple[int, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty size list")
    return tuple(int(p) for p in parts)


_SCHEMA = (
    ("camera", "fx", "fx", _parse_float),
    ("camera", "fy", "fy", _parse_float),
    ("camera", "cu", "cu", _parse_float),
    ("camera", "cv", "cv", _parse_float),
    ("camera", "image_width", "image_width", _parse_int),
    ("camera", "image_height", "image_height", _parse_int),
    ("camera", "camera_height", "camera_height", _parse_float),
    ("camera", "pitch", "pitch", _parse_float),
    ("camera", "yaw", "yaw", _parse_float),
    ("ipm", "x_min", "x_min", _parse_float),
    ("ipm", "x_max", "x_max", _parse_float),
    ("ipm", "y_min", "y_min", _parse_float),
    ("ipm", "y_max", "y_max", _parse_float),
    ("ipm", "out_width", "out_width", _parse_int),
    ("ipm", "out_height", "out_height", _parse_int),
    ("features", "edge_weight", "edge_weight", _parse_float),
    ("features", "gray_weight", "gray_weight", _parse_float),
    ("features", "low_threshold", "low_threshold", _parse_float),
    ("features", "high_threshold", "high_threshold", _parse_float),
    ("features", "sigma", "sigma", _parse_float),
    ("extraction", "movement_penalty", "movement_penalty", _parse_float),
    ("extraction", "branch_radius", "branch_radius", _parse_int),
    ("extraction", "residual_threshold", "residual_threshold", _parse_float),
    ("extraction", "stop_cost", "stop_cost", _parse_stop_cost),
    ("extraction", "max_lanes", "max_lanes", _parse_int),
    ("extraction", "suppression_halfwidth", "suppression_halfwidth", _parse_int),
    ("extraction", "min_inlier_ratio", "min_inlier_ratio", _parse_float),
    ("extraction", "ransac_iterations", "ransac_iterations", _parse_int),
    ("extraction", "duplicate_separation", "duplicate_separation", _parse_float),
    ("run", "seed", "seed", _parse_int),
    ("run", "debug_dumps", "debug_dumps", _parse_bool),
    ("bench", "sizes", "bench_sizes", _parse_sizes),
    ("bench", "k", "bench_k", _parse_int),
    ("bench", "movement_penalty", "bench_movement_penalty", _parse_float),
    ("bench", "repetitions", "bench_repetitions", _parse_int),
    ("bench", "all_pairs_max_nodes", "bench_all_pairs_max_nodes", _parse_int),
)

_KNOWN_KEYS = {(section, key) for section, key, _, _ in _SCHEMA}
_SECTIONS = ("camera", "ipm", "features", "extraction", "run", "bench")


def read_run_config(path) -> RunConfig:
    """Parse an INI file into a RunConfig, reporting every problem at once."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise ConfigError([f"config file not found: {path}"])
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigError([f"{path}: {exc}"]) from exc

    violations: list[str] = []
    for section in parser.sections():
        if section not in _SECTIONS:
            violations.append(f"unknown section [{section}]")
            continue
        for key in parser[section]:
            if (section, key) not in _KNOWN_KEYS:
                violations.append(f"unknown key {key!r} in [{section}]")

    values: dict[str, object] = {}
    for section, key, field, parse in _SCHEMA:
        if parser.has_option(section, key):
            raw = parser.get(section, key)
            try:
                values[field] = parse(raw)
            except ValueError:
                violations.append(f"[{section}] {key}: cannot parse {raw!r}")

    cfg = dataclasses.replace(RunConfig(), **values)
    # Domain invariants live with the domain types; run every factory so a
    # single bad file reports all of its problems, not just the first.
    for factory in (cfg.camera, cfg.ipm_grid, cfg.fusion_weights, cfg.extraction_config):
        try:
            factory()
        except ValueError as exc:
            violations.append(str(exc))
    if cfg.low_threshold >= cfg.high_threshold:
        violations.append(
            f"[features] thresholds must satisfy low < high, "
            f"got {cfg.low_threshold} >= {cfg.high_threshold}"
        )
    if cfg.sigma <= 0:
        violations.append(f"[features] sigma must be positive, got {cfg.sigma}")
    if not all(s >= 2 for s in cfg.bench_sizes):
        violations.append(f"[bench] sizes must all be >= 2, got {cfg.bench_sizes}")
    if cfg.bench_k < 0:
        violations.append(f"[bench] k must be >= 0, got {cfg.bench_k}")
    if cfg.bench_movement_penalty < 0:
        violations.append(
            f"[bench] movement_penalty must be >= 0, got {cfg.bench_movement_penalty}"
        )
    if cfg.bench_repetitions < 1:
        violations.append(f"[bench] repetitions must be >= 1, got {cfg.bench_repetitions}")
    if cfg.bench_all_pairs_max_nodes < 4:
        violations.append(
            f"[bench] all_pairs_max_nodes must be >= 4, got {cfg.bench_all_pairs_max_nodes}"
        )

    if violations:
        raise ConfigError(violations)
    return cfg


def _format(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    return str(value)


def write_run_config(cfg: RunConfig, path) -> None:
    """Write the effective configuration; reading it back yields ``cfg``."""
    parser = configparser.ConfigParser(interpolation=None)
    for section in _SECTIONS:
        parser.add_section(section)
    for section, key, field, _ in _SCHEMA:
        parser.set(section, key, _format(getattr(cfg, field)))
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        parser.write(fh)
    os.replace(tmp, path)
