"""Shared argument checks for the estimator layer and the CLI.

These cover the domain-specific contracts (8-bit images, finite
non-negative cost fields, sample batches) that generic array validation
doesn't know about.  Everything raises plain ValueError / TypeError so
callers can surface messages unchanged.
"""

from __future__ import annotations

import numpy as np


def require_uint8_image(arr, name: str = "image") -> np.ndarray:
    arr = np.asarray(arr)
    if arr.dtype != np.uint8:
        raise TypeError(f"{name} must be uint8, got {arr.dtype}")
    if arr.ndim == 2:
        return arr
    if arr.ndim == 3 and arr.shape[2] in (3, 4):
        return arr
    raise ValueError(
        f"{name} must be 2-D grayscale or H x W x 3/4 color, got shape {arr.shape}"
    )


def require_cost_field(arr, name: str = "cost field") -> np.ndarray:
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} must be finite everywhere")
    if (arr < 0).any():
        raise ValueError(f"{name} must be non-negative")
    return arr


def require_image_batch(X, name: str = "X") -> list[np.ndarray]:
    """Batches are sequences of images; a bare array is refused because a
    3-D array is ambiguous (stack of grayscale frames vs one color image)."""
    if isinstance(X, np.ndarray):
        raise TypeError(
            f"{name} must be a sequence of images (wrap a single image in a list)"
        )
    batch = list(X)
    if not batch:
        raise ValueError(f"{name} must contain at least one image")
    return batch


def require_row_samples(X) -> np.ndarray:
    """Row coordinates as a flat float vector; accepts (n,) or (n, 1)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 2 and X.shape[1] == 1:
        X = X[:, 0]
    if X.ndim != 1 or X.size == 0:
        raise ValueError(f"expected row coordinates shaped (n,) or (n, 1), got {X.shape}")
    return X
