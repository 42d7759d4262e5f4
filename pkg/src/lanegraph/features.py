"""Per-pixel lane evidence: edge map, normalized intensity, weighted fusion,
and the cost grid the path solver consumes.

The fused feature is f = w_e * f_e + w_g * f_g with w_e + w_g = 1, so f
stays in [0, 1] and the node cost 1 - f is small exactly where lane
evidence is strong.  Everything operates on the bird's-eye-view raster.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

#: Classical hysteresis thresholds on 8-bit-scale gradient magnitude.
DEFAULT_LOW_THRESHOLD = 50.0
DEFAULT_HIGH_THRESHOLD = 150.0

#: Smoothing kernel: sigma 1.4 over a 5x5 support.
DEFAULT_SIGMA = 1.4
_KERNEL_RADIUS = 2

# ITU-R 601 luminance weights.
_LUMA = np.array([0.299, 0.587, 0.114])

_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_SOBEL_Y = _SOBEL_X.T


@dataclass(frozen=True)
class FusionWeights:
    """Edge/intensity mixing weights, constrained to a convex combination.

    Violations are rejected, not renormalized: silently rescaling would
    hide configuration mistakes.  The sum check allows one part in 1e9 of
    float slack so that pairs like (0.7, 0.3) pass.
    """

    edge: float = 0.6
    gray: float = 0.4

    def __post_init__(self):
        for name, w in (("edge", self.edge), ("gray", self.gray)):
            if not (math.isfinite(w) and 0.0 <= w <= 1.0):
                raise ValueError(f"{name} weight must lie in [0, 1], got {w}")
        if abs(self.edge + self.gray - 1.0) > 1e-9:
            raise ValueError(
                f"weights must sum to 1, got {self.edge} + {self.gray} = {self.edge + self.gray}"
            )


@dataclass(frozen=True)
class FeatureMaps:
    """The three per-pixel maps: binary edges, normalized gray, and their
    weighted fusion.  All same-shaped, fused and gray in [0, 1]."""

    edge: np.ndarray = field(repr=False)
    gray: np.ndarray = field(repr=False)
    fused: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not (self.edge.shape == self.gray.shape == self.fused.shape):
            raise ValueError(
                f"feature maps must share a shape, got {self.edge.shape}, "
                f"{self.gray.shape}, {self.fused.shape}"
            )
        if not np.isin(self.edge, (0, 1)).all():
            raise ValueError("edge map must be binary")
        for name, arr in (("gray", self.gray), ("fused", self.fused)):
            if arr.min() < 0.0 or arr.max() > 1.0:
                raise ValueError(f"{name} map must lie in [0, 1]")


def to_grayscale(image) -> np.ndarray:
    """8-bit luminance raster from a gray or RGB image.

    Gray input (2-D) passes through bit-identically after dtype checks;
    RGB is combined with ITU-R 601 weights and rounded.
    """
    img = np.asarray(image)
    if img.size == 0:
        raise ValueError("empty image")
    if img.ndim == 2:
        if img.dtype == np.uint8:
            return img
        arr = np.asarray(img, dtype=np.float64)
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("gray input must lie in the 8-bit range [0, 255]")
        return np.rint(arr).astype(np.uint8)
    if img.ndim == 3 and img.shape[2] == 3:
        arr = np.asarray(img, dtype=np.float64)
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("color input must lie in the 8-bit range [0, 255]")
        return np.rint(arr @ _LUMA).astype(np.uint8)
    raise ValueError(f"unsupported pixel format: shape {img.shape}")


def _gaussian_kernel(sigma: float, radius: int = _KERNEL_RADIUS) -> np.ndarray:
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(ax**2) / (2.0 * sigma**2))
    k = np.outer(g, g)
    return k / k.sum()


def canny_edges(
    gray,
    low: float = DEFAULT_LOW_THRESHOLD,
    high: float = DEFAULT_HIGH_THRESHOLD,
    sigma: float = DEFAULT_SIGMA,
) -> np.ndarray:
    """Binary edge map: Gaussian smoothing, Sobel gradients, non-maximum
    suppression, then double-threshold hysteresis.

    Args:
        gray: 2-D uint8 raster.
        low/high: hysteresis thresholds on the L2 gradient magnitude
            (8-bit scale; a full 0-to-255 step peaks above 1000).
        sigma: smoothing strength over a fixed 5x5 support.

    Returns:
        uint8 grid of {0, 1}, 1 at edge pixels.
    """
    gray = np.asarray(gray)
    if gray.ndim != 2 or gray.size == 0:
        raise ValueError(f"expected a non-empty 2-D gray raster, got shape {gray.shape}")
    if gray.dtype != np.uint8:
        raise ValueError(f"expected uint8 input, got {gray.dtype}")
    if not (0 < low < high):
        raise ValueError(f"thresholds must satisfy 0 < low < high, got {low}, {high}")

    smooth = ndimage.convolve(gray.astype(np.float64), _gaussian_kernel(sigma), mode="nearest")
    gx = ndimage.convolve(smooth, _SOBEL_X, mode="nearest")
    gy = ndimage.convolve(smooth, _SOBEL_Y, mode="nearest")
    mag = np.hypot(gx, gy)

    # Non-maximum suppression: quantize the gradient direction into four
    # sectors and compare against the two neighbours along it.  The
    # comparison is >= on one side and > on the other so a two-pixel
    # plateau (a perfectly centred step edge) keeps exactly one pixel.
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    sector = np.zeros(mag.shape, dtype=np.uint8)
    sector[(angle >= 22.5) & (angle < 67.5)] = 1  # diagonal /
    sector[(angle >= 67.5) & (angle < 112.5)] = 2  # vertical gradient
    sector[(angle >= 112.5) & (angle < 157.5)] = 3  # diagonal \
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    padded = np.pad(mag, 1, mode="constant")
    keep = np.zeros(mag.shape, dtype=bool)
    for s, (dr, dc) in offsets.items():
        fwd = padded[1 + dr : 1 + dr + mag.shape[0], 1 + dc : 1 + dc + mag.shape[1]]
        bwd = padded[1 - dr : 1 - dr + mag.shape[0], 1 - dc : 1 - dc + mag.shape[1]]
        keep |= (sector == s) & (mag >= bwd) & (mag > fwd)

    candidate = keep & (mag >= low)
    strong = keep & (mag >= high)
    labels, n = ndimage.label(candidate, structure=np.ones((3, 3), dtype=int))
    if n == 0:
        return np.zeros(gray.shape, dtype=np.uint8)
    strong_ids = np.unique(labels[strong])
    strong_ids = strong_ids[strong_ids != 0]
    return np.isin(labels, strong_ids).astype(np.uint8)


def gray_feature(gray) -> np.ndarray:
    """Normalized intensity in [0, 1]: fixed division by 255 rather than a
    per-image stretch, so cost scales stay comparable between frames."""
    gray = np.asarray(gray)
    if gray.dtype != np.uint8:
        raise ValueError(f"expected uint8 input, got {gray.dtype}")
    return gray.astype(np.float64) / 255.0


def fuse_features(edge, gray, weights: FusionWeights | None = None) -> np.ndarray:
    """Pointwise weighted sum of the binary edge map and the normalized
    gray map; high where lane evidence is strong."""
    if weights is None:
        weights = FusionWeights()
    edge = np.asarray(edge, dtype=np.float64)
    gray = np.asarray(gray, dtype=np.float64)
    if edge.shape != gray.shape:
        raise ValueError(f"shape mismatch: edge {edge.shape} vs gray {gray.shape}")
    if not np.isin(edge, (0.0, 1.0)).all():
        raise ValueError("edge map must be binary")
    if gray.size and (gray.min() < 0.0 or gray.max() > 1.0):
        raise ValueError("gray map must lie in [0, 1]")
    return weights.edge * edge + weights.gray * gray


def cost_grid(fused) -> np.ndarray:
    """Node costs 1 - f: cheap exactly where the fused feature is high."""
    fused = np.asarray(fused, dtype=np.float64)
    if fused.size and (fused.min() < 0.0 or fused.max() > 1.0):
        raise ValueError("fused feature must lie in [0, 1]")
    return 1.0 - fused


def image_to_graph_orientation(grid) -> np.ndarray:
    """Flip a raster-ordered grid (row 0 at the top) into graph order
    (row index 0 = bottom of the image, nearest the camera).  Applying it
    twice restores the input exactly."""
    grid = np.asarray(grid)
    if grid.ndim != 2 or grid.size == 0:
        raise ValueError(f"expected a non-empty 2-D grid, got shape {grid.shape}")
    return np.ascontiguousarray(np.flipud(grid))


def compute_features(
    ipm_gray,
    weights: FusionWeights | None = None,
    low: float = DEFAULT_LOW_THRESHOLD,
    high: float = DEFAULT_HIGH_THRESHOLD,
    sigma: float = DEFAULT_SIGMA,
) -> FeatureMaps:
    """Run the full feature stack on a bird's-eye-view 8-bit raster."""
    if weights is None:
        weights = FusionWeights()
    gray = to_grayscale(ipm_gray)
    f_e = canny_edges(gray, low=low, high=high, sigma=sigma)
    f_g = gray_feature(gray)
    return FeatureMaps(edge=f_e, gray=f_g, fused=fuse_features(f_e, f_g, weights))
