"""Estimator wrappers around the functional pipeline.

The heavy lifting lives in the plain functions (``warp_to_ipm``,
``compute_features``, ``extract_lanes``, ...); these classes expose the same
steps with the fit/transform/predict surface so the stages compose in a
``sklearn.pipeline.Pipeline`` and play well with ``get_params`` /
``set_params`` / ``clone``.  Constructor arguments are stored verbatim, per
the usual estimator contract; validation happens in ``fit``.

Batches are sequences of per-frame arrays (frames differ in shape in
general, so there is no stacked-ndarray form).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .extraction import (
    DetectionResult,
    ExtractionConfig,
    detect,
    extract_lanes,
    fit_parabola_ransac,
)
from .features import (
    DEFAULT_HIGH_THRESHOLD,
    DEFAULT_LOW_THRESHOLD,
    DEFAULT_SIGMA,
    FusionWeights,
    compute_features,
    cost_grid,
    image_to_graph_orientation,
)
from .geometry import CameraModel, IpmGrid, warp_to_ipm
from .validation import (
    require_cost_field,
    require_image_batch,
    require_row_samples,
    require_uint8_image,
)


class IpmTransformer(TransformerMixin, BaseEstimator):
    """Warps camera frames to bird's-eye rasters (uint8).

    Parameters
    ----------
    camera : CameraModel with attitude set.
    grid : IpmGrid or None for the default footprint.
    """

    def __init__(self, camera: CameraModel | None = None, grid: IpmGrid | None = None):
        self.camera = camera
        self.grid = grid

    def fit(self, X=None, y=None):
        if self.camera is None:
            raise ValueError("IpmTransformer needs a camera")
        if not self.camera.has_attitude:
            raise ValueError("camera attitude (pitch, yaw) must be set before warping")
        self.grid_ = self.grid if self.grid is not None else IpmGrid()
        return self

    def transform(self, X) -> list[np.ndarray]:
        check_is_fitted(self)
        out = []
        for img in require_image_batch(X):
            warped = warp_to_ipm(np.asarray(img), self.camera, self.grid_)
            out.append(np.clip(np.rint(warped), 0, 255).astype(np.uint8))
        return out


class CostFieldTransformer(TransformerMixin, BaseEstimator):
    """Turns uint8 bird's-eye rasters into cost fields (still image-oriented:
    row 0 is the far edge; flip before graph construction).

    Parameters mirror the functional feature stage: fusion weights and the
    edge-detector knobs.
    """

    def __init__(
        self,
        weights: FusionWeights | None = None,
        low: float = DEFAULT_LOW_THRESHOLD,
        high: float = DEFAULT_HIGH_THRESHOLD,
        sigma: float = DEFAULT_SIGMA,
    ):
        self.weights = weights
        self.low = low
        self.high = high
        self.sigma = sigma

    def fit(self, X=None, y=None):
        self.weights_ = self.weights if self.weights is not None else FusionWeights()
        if not (0 < self.low < self.high):
            raise ValueError(f"thresholds must satisfy 0 < low < high, got {self.low}, {self.high}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        return self

    def transform(self, X) -> list[np.ndarray]:
        check_is_fitted(self)
        out = []
        for raster in require_image_batch(X):
            raster = require_uint8_image(raster, "raster")
            maps = compute_features(
                raster, self.weights_, low=self.low, high=self.high, sigma=self.sigma
            )
            out.append(cost_grid(maps.fused))
        return out


class ParabolaRansacRegressor(RegressorMixin, BaseEstimator):
    """Robust quadratic fit u = b2 v^2 + b1 v + b0 as a regressor.

    ``fit(X, y)`` takes row coordinates X (shape (n,) or (n, 1)) and column
    coordinates y; the consensus-maximal parabola lands in ``coef_`` with
    the per-sample verdicts in ``inlier_mask_``.

    Parameters
    ----------
    residual_threshold : squared-residual inlier bound, px^2.
    max_iterations : sampling rounds.
    random_state : seed for the sampler.
    """

    def __init__(
        self,
        residual_threshold: float = 5.0,
        max_iterations: int = 200,
        random_state: int = 0,
    ):
        self.residual_threshold = residual_threshold
        self.max_iterations = max_iterations
        self.random_state = random_state

    def fit(self, X, y):
        v = require_row_samples(X)
        u = np.asarray(y, dtype=np.float64)
        if u.shape != v.shape:
            raise ValueError(f"X and y disagree: {v.shape} vs {u.shape}")
        beta, mask = fit_parabola_ransac(
            (v, u), self.residual_threshold, self.max_iterations, self.random_state
        )
        self.coef_ = np.asarray(beta, dtype=np.float64)
        self.inlier_mask_ = mask
        self.inlier_ratio_ = float(mask.mean())
        self.n_features_in_ = 1
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self)
        v = require_row_samples(X)
        return self.coef_[0] * v**2 + self.coef_[1] * v + self.coef_[2]


class LaneDetector(BaseEstimator):
    """End of the pipeline: cost fields (or camera frames) in, lane
    coefficient arrays out.

    With ``camera`` set, ``predict`` expects source images and runs the full
    warp/feature/extract chain per frame.  Without a camera it expects
    image-oriented cost fields (row 0 = far edge), as produced by
    ``CostFieldTransformer``.  Either way each frame yields an
    (n_lanes, 3) array of [b2, b1, b0] rows; ``detect_frames`` returns the
    full per-frame results instead.
    """

    def __init__(
        self,
        camera: CameraModel | None = None,
        grid: IpmGrid | None = None,
        weights: FusionWeights | None = None,
        config: ExtractionConfig | None = None,
    ):
        self.camera = camera
        self.grid = grid
        self.weights = weights
        self.config = config

    def fit(self, X=None, y=None):
        self.config_ = self.config if self.config is not None else ExtractionConfig()
        if self.camera is not None and not self.camera.has_attitude:
            raise ValueError("camera attitude (pitch, yaw) must be set before detection")
        return self

    def detect_frames(self, X) -> list[DetectionResult]:
        check_is_fitted(self)
        results = []
        for frame in require_image_batch(X):
            if self.camera is not None:
                results.append(
                    detect(frame, self.camera, self.grid, self.weights, self.config_)
                )
            else:
                field = require_cost_field(frame)
                results.append(extract_lanes(image_to_graph_orientation(field), self.config_))
        return results

    def predict(self, X) -> list[np.ndarray]:
        return [
            np.array([lane.coefficients for lane in res.lanes], dtype=np.float64).reshape(-1, 3)
            for res in self.detect_frames(X)
        ]
