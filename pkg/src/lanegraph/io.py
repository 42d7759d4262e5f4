"""File formats for the command-line tools.

Everything here is deterministic — identical inputs produce byte-identical
files — and every write is atomic (temp file + rename) so an interrupted
batch never leaves a torn artifact behind.  Floats in CSV files are
written with ``repr``, which round-trips exactly.
"""

from __future__ import annotations

import io
import json
import os

import numpy as np
from PIL import Image, ImageDraw

LANE_RECORD_HEADER = ("lane_id", "beta2", "beta1", "beta0", "inlier_ratio", "path_cost")
POLYLINE_HEADER = ("frame_id", "lane_id", "u", "v")


def _atomic_write_bytes(path, data: bytes) -> None:
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def read_image(path) -> np.ndarray:
    """Load an image as uint8, grayscale (H, W) or color (H, W, 3)."""
    with Image.open(path) as img:
        if img.mode not in ("L", "RGB"):
            img = img.convert("RGB" if ("A" in img.mode or "P" in img.mode) else "L")
        return np.asarray(img, dtype=np.uint8)


def write_png(path, array) -> None:
    arr = np.asarray(array)
    if arr.dtype != np.uint8:
        raise ValueError(f"PNG writer expects uint8, got {arr.dtype}")
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    _atomic_write_bytes(path, buf.getvalue())


def write_pgm(path, gray) -> None:
    """Binary PGM (P5): a grid dump readable without any imaging library."""
    arr = np.asarray(gray)
    if arr.dtype != np.uint8 or arr.ndim != 2:
        raise ValueError(f"PGM writer expects a 2-D uint8 array, got {arr.dtype} {arr.shape}")
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    _atomic_write_bytes(path, header + arr.tobytes())


def write_grid(path, grid) -> None:
    """Dump a float grid exactly (.npy); loading reproduces it bit for bit."""
    buf = io.BytesIO()
    np.save(buf, np.asarray(grid))
    _atomic_write_bytes(path, buf.getvalue())


def write_json(path, obj) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    _atomic_write_bytes(path, (text + "\n").encode("utf-8"))


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_lane_records(path, lanes) -> None:
    """One row per accepted lane: ``lane_id,beta2,beta1,beta0,inlier_ratio,path_cost``."""
    lines = [",".join(LANE_RECORD_HEADER)]
    for i, lane in enumerate(lanes):
        lines.append(
            f"{i},{lane.beta2!r},{lane.beta1!r},{lane.beta0!r},"
            f"{lane.inlier_ratio!r},{lane.path_cost!r}"
        )
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


def write_polyline_csv(path, frame_id, polylines) -> None:
    """Sample rows ``frame_id,lane_id,u,v`` for each lane's polyline."""
    lines = [",".join(POLYLINE_HEADER)]
    for lane_id, poly in enumerate(polylines):
        pts = np.asarray(poly, dtype=np.float64)
        for u, v in pts:
            lines.append(f"{frame_id},{lane_id},{float(u)!r},{float(v)!r}")
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


def draw_overlay(image, polylines, color=(255, 0, 0), width: int = 2) -> np.ndarray:
    """Copy of ``image`` with each polyline drawn on top (red by default)."""
    arr = np.asarray(image)
    if arr.dtype != np.uint8:
        raise ValueError(f"overlay expects a uint8 image, got {arr.dtype}")
    img = Image.fromarray(arr)
    if img.mode != "RGB":
        img = img.convert("RGB")
    draw = ImageDraw.Draw(img)
    for poly in polylines:
        pts = [(float(u), float(v)) for u, v in np.asarray(poly, dtype=np.float64)]
        if len(pts) >= 2:
            draw.line(pts, fill=tuple(color), width=width)
    return np.asarray(img)
