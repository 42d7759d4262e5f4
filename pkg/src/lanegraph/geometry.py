"""Camera geometry: vanishing points, attitude recovery, and the
inverse-perspective (bird's-eye-view) mapping.

Conventions, fixed throughout the package:

* World frame: X lateral (right positive), Y forward, Z up; the road is the
  plane Z = 0 and the camera sits at (0, 0, h).
* Camera frame: x right, y down, z forward (optical axis); pixels come from
  the pinhole model p ~ K [R | t] P with zero skew and square-ish pixels.
* Roll is fixed at zero: the camera's x axis stays horizontal.
* Pitch ``beta`` is positive when the camera tilts down.  Yaw ``gamma`` is
  defined through the vanishing point of the world's forward (+Y) axis:
  positive gamma puts that vanishing point right of the principal point,
  which corresponds to the optical axis swinging *left* of +Y (turn your
  head left and what was ahead of you appears to your right).  The attitude
  formulas and the rotation built here are exact inverses of each other, so
  the sign convention is self-consistent; it is documented because the
  opposite choice is equally defensible.

With a centred principal point the recovery formulas reduce to

    beta  = arctan(tan(alpha_v) * (1 - 2 v_vp / V))
    gamma = arctan(tan(alpha_u) * (2 u_vp / U - 1))

where alpha_u, alpha_v are the half view angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .errors import GeometryError

#: |n_z| below this (relative to |n|) counts as parallel to the image plane.
DIRECTION_TOL = 1e-9

#: Homogeneous scale below this counts as "at or behind the camera plane".
W_TOL = 1e-9


@dataclass(frozen=True)
class VanishingPoint:
    """Pixel location where a family of parallel 3-D lines meets; may lie
    far outside the image bounds."""

    u: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise GeometryError(f"vanishing point must be finite, got ({self.u}, {self.v})")


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera over the road plane.

    ``intrinsics`` is the 3x3 upper-triangular K (zero skew, positive focal
    lengths, unit lower-right entry).  ``pitch``/``yaw`` are radians and may
    be None until an attitude is chosen (directly or from a vanishing
    point); operations that need the full pose raise ``GeometryError``
    while they are unset.  ``height_m`` is the lens height above the road.
    """

    intrinsics: np.ndarray = field(repr=False)
    image_width: int
    image_height: int
    height_m: float
    pitch: float | None = None
    yaw: float | None = None
    roll: float = 0.0

    def __post_init__(self):
        K = np.asarray(self.intrinsics, dtype=np.float64)
        if K.shape != (3, 3):
            raise GeometryError(f"intrinsic matrix must be 3x3, got {K.shape}")
        lower = np.tril(K, -1)
        if np.any(lower != 0):
            raise GeometryError("intrinsic matrix must be upper-triangular")
        if K[0, 0] <= 0 or K[1, 1] <= 0:
            raise GeometryError("focal lengths must be positive")
        if K[2, 2] != 1.0:
            raise GeometryError("intrinsic matrix must have a unit lower-right entry")
        if K[0, 1] != 0:
            raise GeometryError("skew is not supported; K[0,1] must be 0")
        if self.image_width <= 0 or self.image_height <= 0:
            raise GeometryError("image size must be positive")
        if not (math.isfinite(self.height_m) and self.height_m > 0):
            raise GeometryError(f"camera height must be positive, got {self.height_m}")
        if self.roll != 0.0:
            raise GeometryError("roll is fixed at zero")
        if self.pitch is not None and not (
            math.isfinite(self.pitch) and -math.pi / 2 < self.pitch <= math.pi / 2
        ):
            raise GeometryError(f"pitch must lie in (-pi/2, pi/2], got {self.pitch}")
        if self.yaw is not None and not (
            math.isfinite(self.yaw) and abs(self.yaw) < math.pi / 2
        ):
            raise GeometryError(f"yaw must lie in (-pi/2, pi/2), got {self.yaw}")
        K = np.ascontiguousarray(K)
        K.setflags(write=False)
        object.__setattr__(self, "intrinsics", K)

    @classmethod
    def from_params(
        cls,
        fx: float,
        fy: float,
        cu: float,
        cv: float,
        image_width: int,
        image_height: int,
        height_m: float,
        pitch: float | None = None,
        yaw: float | None = None,
    ) -> "CameraModel":
        K = np.array([[fx, 0.0, cu], [0.0, fy, cv], [0.0, 0.0, 1.0]])
        return cls(K, image_width, image_height, height_m, pitch, yaw)

    # intrinsic accessors
    @property
    def fu(self) -> float:
        return float(self.intrinsics[0, 0])

    @property
    def fv(self) -> float:
        return float(self.intrinsics[1, 1])

    @property
    def cu(self) -> float:
        return float(self.intrinsics[0, 2])

    @property
    def cv(self) -> float:
        return float(self.intrinsics[1, 2])

    @property
    def half_angle_u(self) -> float:
        """Half of the horizontal view angle, arctan(U / 2 f_u)."""
        return math.atan(self.image_width / (2.0 * self.fu))

    @property
    def half_angle_v(self) -> float:
        """Half of the vertical view angle, arctan(V / 2 f_v)."""
        return math.atan(self.image_height / (2.0 * self.fv))

    @property
    def has_attitude(self) -> bool:
        return self.pitch is not None and self.yaw is not None

    def with_attitude(self, pitch: float, yaw: float) -> "CameraModel":
        return replace(self, pitch=pitch, yaw=yaw)

    def with_vp(self, vp: VanishingPoint) -> "CameraModel":
        """Camera with pitch/yaw recovered from the forward-axis VP."""
        beta, gamma = angles_from_vp(self, vp)
        return self.with_attitude(beta, gamma)

    def _require_attitude(self) -> tuple[float, float]:
        if not self.has_attitude:
            raise GeometryError("camera attitude unset; provide pitch/yaw or a vanishing point")
        return float(self.pitch), float(self.yaw)


def rotation_world_to_camera(cam: CameraModel) -> np.ndarray:
    """Rotation taking world vectors into the camera frame.

    Built so that the camera's x axis stays horizontal (zero roll), the
    optical axis dips by exactly ``pitch``, and the world forward axis +Y
    lands on the camera ray (tan(yaw), -tan(pitch), 1) — which is what
    makes the vanishing-point attitude formulas exact.  The optical axis'
    compass heading that achieves this is atan2(-sin(yaw)cos(pitch),
    cos(yaw)), measured from +Y toward +X.

    At pitch = pi/2 (straight down) the forward axis lies in the image
    plane, its vanishing point escapes to infinity, and yaw loses that
    meaning; the heading formula then fixes the camera's "up in image" to
    world +Y, which is the natural nadir limit.
    """
    beta, gamma = cam._require_attitude()
    sb, cb = math.sin(beta), math.cos(beta)
    heading = math.atan2(-math.sin(gamma) * cb, math.cos(gamma))
    sg, cg = math.sin(heading), math.cos(heading)
    x_cam = (cg, -sg, 0.0)
    y_cam = (-sb * sg, -sb * cg, -cb)
    z_cam = (sg * cb, cg * cb, -sb)
    return np.array([x_cam, y_cam, z_cam])


def extrinsics(cam: CameraModel) -> tuple[np.ndarray, np.ndarray]:
    """(R, t) with camera coords = R @ world + t; the camera centre is
    (0, 0, h) in world coordinates."""
    R = rotation_world_to_camera(cam)
    t = -cam.height_m * R[:, 2]
    return R, t


def camera_matrix(cam: CameraModel) -> np.ndarray:
    """Full 3x4 projection K [R | t]."""
    R, t = extrinsics(cam)
    return cam.intrinsics @ np.column_stack([R, t])


def project_points(cam: CameraModel, points_world) -> np.ndarray:
    """Project (N, 3) world points to (N, 2) pixels.

    Raises ``GeometryError`` if any point is on or behind the camera plane.
    """
    pts = np.atleast_2d(np.asarray(points_world, dtype=np.float64))
    P = camera_matrix(cam)
    h = pts @ P[:, :3].T + P[:, 3]
    w = h[:, 2]
    if np.any(w <= W_TOL):
        raise GeometryError("point on or behind the camera plane")
    return h[:, :2] / w[:, None]


def vanishing_point_of_direction(cam: CameraModel, n) -> VanishingPoint:
    """Vanishing point of all 3-D lines with camera-frame direction ``n``.

    The point at infinity of such a line projects to K n (dehomogenised),
    independent of the line's position, so every parallel line shares it.

    Raises:
        GeometryError: the direction is (numerically) parallel to the image
            plane, so the projection escapes to infinity.
    """
    n = np.asarray(n, dtype=np.float64).reshape(3)
    norm = float(np.linalg.norm(n))
    if norm == 0.0:
        raise GeometryError("zero direction vector")
    if abs(n[2]) < DIRECTION_TOL * norm:
        raise GeometryError("direction parallel to the image plane has no finite vanishing point")
    h = cam.intrinsics @ n
    return VanishingPoint(u=float(h[0] / h[2]), v=float(h[1] / h[2]))


def forward_axis_vp(cam: CameraModel) -> VanishingPoint:
    """Vanishing point of the world's +Y (lane) direction for the camera's
    current attitude."""
    R = rotation_world_to_camera(cam)
    return vanishing_point_of_direction(cam, R[:, 1])


def angles_from_vp(cam: CameraModel, vp: VanishingPoint) -> tuple[float, float]:
    """Recover (pitch, yaw) from the forward-axis vanishing point.

    pitch = arctan((c_v - v_vp) / f_v), yaw = arctan((u_vp - c_u) / f_u);
    with a centred principal point these are exactly the half-view-angle
    forms arctan(tan(alpha_v)(1 - 2 v_vp/V)) and
    arctan(tan(alpha_u)(2 u_vp/U - 1)).
    """
    beta = math.atan((cam.cv - vp.v) / cam.fv)
    gamma = math.atan((vp.u - cam.cu) / cam.fu)
    return beta, gamma


@dataclass(frozen=True)
class IpmGrid:
    """Raster over a rectangle of the road plane.

    Column a covers X = x_range[0] + (a + 0.5) * meters_per_px_x; row b
    covers Y = y_range[1] - (b + 0.5) * meters_per_px_y, so row 0 is the
    far edge and the bottom row is nearest the camera.
    """

    x_range: tuple[float, float] = (-6.0, 6.0)
    y_range: tuple[float, float] = (5.0, 35.0)
    out_width: int = 240
    out_height: int = 600

    def __post_init__(self):
        if not (self.x_range[0] < self.x_range[1] and self.y_range[0] < self.y_range[1]):
            raise GeometryError(f"empty ground extent {self.x_range} x {self.y_range}")
        if self.out_width <= 0 or self.out_height <= 0:
            raise GeometryError("output resolution must be positive")

    @property
    def meters_per_px_x(self) -> float:
        return (self.x_range[1] - self.x_range[0]) / self.out_width

    @property
    def meters_per_px_y(self) -> float:
        return (self.y_range[1] - self.y_range[0]) / self.out_height

    def raster_to_ground(self, col, row):
        """Pixel centre (col, row) -> ground (X, Y); accepts arrays."""
        col = np.asarray(col, dtype=np.float64)
        row = np.asarray(row, dtype=np.float64)
        X = self.x_range[0] + (col + 0.5) * self.meters_per_px_x
        Y = self.y_range[1] - (row + 0.5) * self.meters_per_px_y
        return X, Y

    def ground_to_raster(self, X, Y):
        """Ground (X, Y) -> fractional raster (col, row); accepts arrays."""
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        col = (X - self.x_range[0]) / self.meters_per_px_x - 0.5
        row = (self.y_range[1] - Y) / self.meters_per_px_y - 0.5
        return col, row


def ipm_homography(cam: CameraModel) -> np.ndarray:
    """Ground-to-image homography: pixel ~ H [X, Y, 1]^T for road points.

    Restricting the full projection to Z = 0 drops the third rotation
    column, leaving H = K [r1 r2 t].

    Raises:
        GeometryError: attitude unset, or H numerically singular.
    """
    R, t = extrinsics(cam)
    H = cam.intrinsics @ np.column_stack([R[:, 0], R[:, 1], t])
    det = float(np.linalg.det(H))
    scale = float(np.linalg.norm(H)) ** 3
    if abs(det) < 1e-12 * scale:
        raise GeometryError("ground-to-image map is singular for this camera pose")
    return H


def warp_to_ipm(image, cam: CameraModel, grid: IpmGrid | None = None) -> np.ndarray:
    """Resample a camera image onto the bird's-eye-view raster.

    Every output pixel is traced to its road-plane point, projected into
    the source image through the ground homography, and bilinearly
    interpolated there; road points that fall outside the source frame (or
    behind the camera plane) come out 0.

    Args:
        image: 2-D grayscale raster, any real dtype.
        cam: camera with attitude set.
        grid: road-plane raster layout; defaults to 12 m x 30 m at 5 cm/px.

    Returns:
        (grid.out_height, grid.out_width) float64 raster in the source
        image's intensity scale.
    """
    img = np.asarray(image)
    if img.ndim != 2 or img.size == 0:
        raise GeometryError(f"expected a non-empty 2-D grayscale image, got shape {img.shape}")
    if grid is None:
        grid = IpmGrid()
    H = ipm_homography(cam)
    cols, rows = np.meshgrid(np.arange(grid.out_width), np.arange(grid.out_height))
    X, Y = grid.raster_to_ground(cols, rows)
    hx = H[0, 0] * X + H[0, 1] * Y + H[0, 2]
    hy = H[1, 0] * X + H[1, 1] * Y + H[1, 2]
    hw = H[2, 0] * X + H[2, 1] * Y + H[2, 2]
    behind = hw <= W_TOL
    hw = np.where(behind, 1.0, hw)
    src_u = hx / hw
    src_v = hy / hw
    # points behind the camera plane must not sample anything
    src_u[behind] = -1e9
    src_v[behind] = -1e9
    coords = np.stack([src_v.ravel(), src_u.ravel()])
    out = ndimage.map_coordinates(
        img.astype(np.float64), coords, order=1, mode="constant", cval=0.0
    )
    return out.reshape(grid.out_height, grid.out_width)


def _lane_columns(lane, rows: np.ndarray) -> np.ndarray:
    """Evaluate a lane's column position per raster row; accepts anything
    with a ``coefficients`` attribute or a plain (a, b, c) triple for
    u = a v^2 + b v + c."""
    coeffs = getattr(lane, "coefficients", lane)
    a, b, c = (float(x) for x in coeffs)
    return a * rows**2 + b * rows + c


def project_lane_to_image(lane, cam: CameraModel, grid: IpmGrid | None = None) -> np.ndarray:
    """Map a lane curve from the bird's-eye raster back into the source
    image for overlay drawing.

    Samples the curve at every raster row, lifts the samples to the road
    plane, projects them through the camera, and keeps the ones that land
    inside the image in front of the camera.

    Returns:
        (N, 2) float64 pixel polyline ordered far to near; empty (0, 2) if
        no sample is visible.
    """
    if grid is None:
        grid = IpmGrid()
    rows = np.arange(grid.out_height, dtype=np.float64)
    cols = _lane_columns(lane, rows)
    X, Y = grid.raster_to_ground(cols, rows)
    pts = np.column_stack([X, Y, np.zeros_like(X)])
    P = camera_matrix(cam)
    h = pts @ P[:, :3].T + P[:, 3]
    w = h[:, 2]
    ok = w > W_TOL
    px = np.full_like(w, -1.0)
    py = np.full_like(w, -1.0)
    px[ok] = h[ok, 0] / w[ok]
    py[ok] = h[ok, 1] / w[ok]
    inside = ok & (px >= 0) & (px <= cam.image_width - 1) & (py >= 0) & (py <= cam.image_height - 1)
    return np.column_stack([px[inside], py[inside]])


def estimate_vp_from_image(image, n_lines: int = 25, seed: int = 0) -> VanishingPoint:
    """Best-effort vanishing point from image content alone.

    Extracts straight segments from the edge map with a probabilistic
    Hough transform, intersects every segment pair, and takes the median
    intersection.  Useful when no calibration VP is available; rough by
    design and not part of the validated pipeline.

    Raises:
        GeometryError: fewer than two usable segments.
    """
    from skimage.transform import probabilistic_hough_line

    from .features import canny_edges, to_grayscale

    img = np.asarray(image)
    gray = to_grayscale(img)
    edges = canny_edges(gray)
    segments = probabilistic_hough_line(
        edges.astype(bool), threshold=10, line_length=30, line_gap=3, rng=seed
    )[:n_lines]
    crossings = []
    for i in range(len(segments)):
        (x1, y1), (x2, y2) = segments[i]
        d1 = (x2 - x1, y2 - y1)
        for j in range(i + 1, len(segments)):
            (x3, y3), (x4, y4) = segments[j]
            d2 = (x4 - x3, y4 - y3)
            denom = d1[0] * d2[1] - d1[1] * d2[0]
            n1 = math.hypot(*d1)
            n2 = math.hypot(*d2)
            if n1 == 0 or n2 == 0 or abs(denom) < 1e-3 * n1 * n2:
                continue  # near-parallel pair: intersection is unstable
            s = ((x3 - x1) * d2[1] - (y3 - y1) * d2[0]) / denom
            crossings.append((x1 + s * d1[0], y1 + s * d1[1]))
    if not crossings:
        raise GeometryError("not enough straight structure to estimate a vanishing point")
    arr = np.asarray(crossings)
    return VanishingPoint(u=float(np.median(arr[:, 0])), v=float(np.median(arr[:, 1])))
