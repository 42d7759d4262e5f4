"""Scoring detections against planted ground truth.

Comparison happens in bird's-eye raster coordinates: a planted lane counts
as detected when some accepted lane stays within a lateral tolerance of it
at every raster row.  Scoring in source-image pixels would mix projection
geometry into the number; the curves are fitted in raster space, so that
is where accuracy is meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def max_lateral_deviation(detected_coeffs, planted_coeffs, rows: int) -> float:
    """Worst |column difference| between two raster parabolas over all rows."""
    if rows < 1:
        raise ValueError(f"need at least one raster row, got {rows}")
    v = np.arange(rows, dtype=np.float64)
    d2, d1, d0 = (float(x) for x in detected_coeffs)
    p2, p1, p0 = (float(x) for x in planted_coeffs)
    return float(np.max(np.abs((d2 - p2) * v**2 + (d1 - p1) * v + (d0 - p0))))


@dataclass(frozen=True)
class FrameScore:
    """Outcome of one evaluated frame.

    ``lateral_errors[i]`` is the best (smallest) max-deviation any accepted
    lane achieved against planted lane i — inf when nothing was accepted.
    ``false_lanes`` counts accepted lanes that match no planted lane.
    """

    frame_id: str
    planted: int
    detected: int
    lateral_errors: tuple[float, ...]
    matched: tuple[bool, ...]
    false_lanes: int
    expected_failure: bool = False

    def __post_init__(self):
        if self.planted != len(self.lateral_errors) or self.planted != len(self.matched):
            raise ValueError("per-lane fields need one entry per planted lane")
        if self.detected < 0 or self.false_lanes < 0:
            raise ValueError("lane counts must be >= 0")

    @property
    def hit(self) -> bool:
        """True when at least one planted lane was found (vacuously False
        with nothing planted)."""
        return any(self.matched)

    def as_dict(self) -> dict:
        return {
            "frame_id": self.frame_id,
            "planted": self.planted,
            "detected": self.detected,
            "lateral_errors": [
                e if math.isfinite(e) else None for e in self.lateral_errors
            ],
            "matched": list(self.matched),
            "false_lanes": self.false_lanes,
            "expected_failure": self.expected_failure,
        }


def score_frame(
    frame_id: str,
    planted_coeffs,
    detected_coeffs,
    rows: int,
    tolerance_px: float,
    expected_failure: bool = False,
) -> FrameScore:
    """Match accepted lanes to planted ones for a single frame.

    Both coefficient lists hold (b2, b1, b0) raster-space triples.  Every
    planted lane is scored against its best-matching accepted lane; an
    accepted lane within tolerance of no planted lane is a false lane.
    """
    if not (math.isfinite(tolerance_px) and tolerance_px > 0):
        raise ValueError(f"tolerance must be positive, got {tolerance_px}")
    planted = list(planted_coeffs)
    detected = list(detected_coeffs)
    errors = []
    for p in planted:
        devs = [max_lateral_deviation(d, p, rows) for d in detected]
        errors.append(min(devs) if devs else float("inf"))
    false_lanes = sum(
        1
        for d in detected
        if all(max_lateral_deviation(d, p, rows) > tolerance_px for p in planted)
    )
    return FrameScore(
        frame_id=frame_id,
        planted=len(planted),
        detected=len(detected),
        lateral_errors=tuple(errors),
        matched=tuple(e <= tolerance_px for e in errors),
        false_lanes=false_lanes,
        expected_failure=expected_failure,
    )


@dataclass(frozen=True)
class EvalSummary:
    """Aggregate over a dataset run.

    ``precision`` is the fraction of planted lanes found within tolerance;
    with nothing planted anywhere it is vacuously 1.0 (nothing was missed),
    and the false-lane fraction is the number to look at instead.
    """

    tolerance_px: float
    frames: tuple[FrameScore, ...]
    skipped: tuple[str, ...] = ()

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    @property
    def planted_total(self) -> int:
        return sum(f.planted for f in self.frames)

    @property
    def matched_total(self) -> int:
        return sum(sum(f.matched) for f in self.frames)

    @property
    def precision(self) -> float:
        planted = self.planted_total
        return self.matched_total / planted if planted else 1.0

    @property
    def false_lane_frame_fraction(self) -> float:
        """Fraction of evaluated frames containing any unmatched lane."""
        if not self.frames:
            return 0.0
        return sum(1 for f in self.frames if f.false_lanes > 0) / len(self.frames)

    @property
    def expected_failure_miss_rate(self) -> float:
        """Among frames flagged expected-failure, the fraction where no
        planted lane was found; 0.0 when no frame carries the flag."""
        flagged = [f for f in self.frames if f.expected_failure]
        if not flagged:
            return 0.0
        return sum(1 for f in flagged if not f.hit) / len(flagged)

    def as_dict(self) -> dict:
        return {
            "tolerance_px": self.tolerance_px,
            "n_frames": self.n_frames,
            "planted_total": self.planted_total,
            "matched_total": self.matched_total,
            "precision": self.precision,
            "false_lane_frame_fraction": self.false_lane_frame_fraction,
            "expected_failure_miss_rate": self.expected_failure_miss_rate,
            "skipped": list(self.skipped),
            "frames": [f.as_dict() for f in self.frames],
        }


def summarize(frames, tolerance_px: float, skipped=()) -> EvalSummary:
    return EvalSummary(
        tolerance_px=float(tolerance_px),
        frames=tuple(frames),
        skipped=tuple(str(s) for s in skipped),
    )
