"""Box geometry, camera calibration, and pinhole projection primitives.

All 3D quantities live in the rectified camera frame (x right, y down,
z forward, meters). LiDAR-frame points must be converted once at ingest
time via ``lidar_points_to_camera``; everything downstream is single-frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError

# Clipped projections narrower/shorter than this many pixels are treated as
# not visible in the image.
MIN_VISIBLE_EXTENT = 1.0

_MIN_BOX_EXTENT = 1e-6


def wrap_angle(theta: float) -> float:
    """Wrap an angle into [-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped < -math.pi:
        wrapped += 2.0 * math.pi
    elif wrapped > math.pi:
        wrapped -= 2.0 * math.pi
    return wrapped


_isfinite = math.isfinite


@dataclass(slots=True)
class Box2D:
    """Axis-aligned image rectangle in pixels, corners as (left, top, right, bottom)."""

    left: float
    top: float
    right: float
    bottom: float

    def __post_init__(self):
        # Hot constructor: keep the checks branch-cheap.
        if not (self.left < self.right and self.top < self.bottom):
            raise ValueError(f"degenerate 2D box: {self}")
        if not (_isfinite(self.left) and _isfinite(self.top)
                and _isfinite(self.right) and _isfinite(self.bottom)):
            raise ValueError(f"non-finite 2D box: {self}")

    @property
    def width(self) -> float:
        return self.right - self.left

    @property
    def height(self) -> float:
        return self.bottom - self.top

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.left + self.right), 0.5 * (self.top + self.bottom))

    def corners(self) -> tuple[float, float, float, float]:
        return (self.left, self.top, self.right, self.bottom)

    def translated(self, dx: float, dy: float) -> "Box2D":
        return Box2D(self.left + dx, self.top + dy, self.right + dx, self.bottom + dy)


def _box2d_unchecked(left: float, top: float, right: float, bottom: float) -> Box2D:
    # Hot-path constructor: caller guarantees ordering and finiteness.
    box = object.__new__(Box2D)
    box.left = left
    box.top = top
    box.right = right
    box.bottom = bottom
    return box


@dataclass(slots=True)
class Box3D:
    """Oriented cuboid in rectified camera coordinates.

    ``center_*`` is the cuboid centroid in meters. ``yaw`` rotates the box
    about the vertical (y) axis; at yaw 0 the length axis is x, the height
    axis is y, and the width axis is z.
    """

    center_x: float
    center_y: float
    center_z: float
    height: float
    width: float
    length: float
    yaw: float = 0.0

    def __post_init__(self):
        if not (self.height > 0.0 and self.width > 0.0 and self.length > 0.0):
            raise ValueError(f"non-positive 3D box dimensions: {self}")
        if not -math.pi <= self.yaw <= math.pi:
            raise ValueError(f"yaw outside [-pi, pi]: {self.yaw}")
        if not (_isfinite(self.center_x) and _isfinite(self.center_y)
                and _isfinite(self.center_z) and _isfinite(self.height)
                and _isfinite(self.width) and _isfinite(self.length)):
            raise ValueError(f"non-finite 3D box: {self}")

    @property
    def center(self) -> tuple[float, float, float]:
        return (self.center_x, self.center_y, self.center_z)


def _box3d_unchecked(cx: float, cy: float, cz: float, height: float,
                     width: float, length: float, yaw: float) -> Box3D:
    # Hot-path constructor: caller guarantees the invariants hold.
    box = object.__new__(Box3D)
    box.center_x = cx
    box.center_y = cy
    box.center_z = cz
    box.height = height
    box.width = width
    box.length = length
    box.yaw = yaw
    return box


@dataclass(slots=True, eq=False)
class Calibration:
    """Camera projection, rectification, and LiDAR-to-camera extrinsics.

    ``projection`` is the 3x4 pixel projection applied after
    ``rectification`` (3x3). ``lidar_to_camera`` (3x4) moves LiDAR-frame
    points into the unrectified camera frame.
    """

    projection: np.ndarray
    rectification: np.ndarray = field(default_factory=lambda: np.eye(3))
    lidar_to_camera: np.ndarray = field(
        default_factory=lambda: np.hstack([np.eye(3), np.zeros((3, 1))]))
    # projection @ rectification flattened to plain floats; projection is hot.
    _combined: tuple = field(init=False, repr=False)

    def __post_init__(self):
        self.projection = np.asarray(self.projection, dtype=float)
        self.rectification = np.asarray(self.rectification, dtype=float)
        self.lidar_to_camera = np.asarray(self.lidar_to_camera, dtype=float)
        if self.projection.shape != (3, 4):
            raise ValueError(f"projection must be 3x4, got {self.projection.shape}")
        if self.rectification.shape != (3, 3):
            raise ValueError(f"rectification must be 3x3, got {self.rectification.shape}")
        if self.lidar_to_camera.shape != (3, 4):
            raise ValueError(f"lidar_to_camera must be 3x4, got {self.lidar_to_camera.shape}")
        residual = self.rectification @ self.rectification.T - np.eye(3)
        if np.abs(residual).max() > 1e-6:
            raise ValueError("rectification matrix is not orthonormal")
        if self.projection[0, 0] == 0.0 or self.projection[1, 1] == 0.0:
            raise ValueError("projection has zero focal entries")
        p = self.projection
        r = self.rectification
        combined = []
        for i in range(3):
            for j in range(3):
                combined.append(float(
                    p[i, 0] * r[0, j] + p[i, 1] * r[1, j] + p[i, 2] * r[2, j]))
            combined.append(float(p[i, 3]))
        self._combined = tuple(combined)


def iou_2d(a: Box2D, b: Box2D) -> float:
    """Intersection-over-union of two image rectangles, in [0, 1].

    Touching edges (zero-area intersection) count as disjoint.
    """
    iw = min(a.right, b.right) - max(a.left, b.left)
    if iw <= 0.0:
        return 0.0
    ih = min(a.bottom, b.bottom) - max(a.top, b.top)
    if ih <= 0.0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def centroid_distance_3d(a: Box3D, b: Box3D) -> float:
    """Euclidean distance between cuboid centroids, in meters."""
    dx = a.center_x - b.center_x
    dy = a.center_y - b.center_y
    dz = a.center_z - b.center_z
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def box3d_corners(box: Box3D) -> np.ndarray:
    """The 8 cuboid corners as an (8, 3) array in camera coordinates.

    Corner i has sign bits (i >> 2 & 1, i >> 1 & 1, i & 1) selecting the
    -/+ half extent along the box's local length, height, and width axes,
    rotated by yaw about the vertical axis and translated to the center.
    """
    hx = 0.5 * box.length
    hy = 0.5 * box.height
    hz = 0.5 * box.width
    lx = np.array([-hx, -hx, -hx, -hx, hx, hx, hx, hx])
    ly = np.array([-hy, -hy, hy, hy, -hy, -hy, hy, hy])
    lz = np.array([-hz, hz, -hz, hz, -hz, hz, -hz, hz])
    c = math.cos(box.yaw)
    s = math.sin(box.yaw)
    out = np.empty((8, 3))
    out[:, 0] = c * lx + s * lz + box.center_x
    out[:, 1] = ly + box.center_y
    out[:, 2] = -s * lx + c * lz + box.center_z
    return out


def clip_box_to_image(box: Box2D, width: float, height: float) -> Box2D | None:
    """Clamp a rectangle to image bounds; None if the visible part is negligible."""
    left = max(box.left, 0.0)
    top = max(box.top, 0.0)
    right = min(box.right, float(width))
    bottom = min(box.bottom, float(height))
    if right - left < MIN_VISIBLE_EXTENT or bottom - top < MIN_VISIBLE_EXTENT:
        return None
    return Box2D(left, top, right, bottom)


def project_box3d(box: Box3D, calib: Calibration,
                  image_size: tuple[float, float] | None = None) -> Box2D | None:
    """Project a camera-frame cuboid to its axis-aligned image rectangle.

    All 8 corners go through rectification then projection and the bounding
    rectangle of the projected points is returned. Returns None when the box
    is behind the camera (any corner with non-positive projective depth) or,
    when ``image_size = (width, height)`` is given, when the clipped
    rectangle is not visibly inside the image.
    """
    (c00, c01, c02, c03,
     c10, c11, c12, c13,
     c20, c21, c22, c23) = calib._combined
    hx = 0.5 * box.length
    hy = 0.5 * box.height
    hz = 0.5 * box.width
    cos_yaw = math.cos(box.yaw)
    sin_yaw = math.sin(box.yaw)
    bx, by, bz = box.center_x, box.center_y, box.center_z
    left = top = math.inf
    right = bottom = -math.inf
    for sx, sz in ((-hx, -hz), (-hx, hz), (hx, -hz), (hx, hz)):
        x = cos_yaw * sx + sin_yaw * sz + bx
        z = -sin_yaw * sx + cos_yaw * sz + bz
        for y in (by - hy, by + hy):
            w = c20 * x + c21 * y + c22 * z + c23
            if w <= 0.0:
                return None
            u = (c00 * x + c01 * y + c02 * z + c03) / w
            v = (c10 * x + c11 * y + c12 * z + c13) / w
            if u < left:
                left = u
            if u > right:
                right = u
            if v < top:
                top = v
            if v > bottom:
                bottom = v
    if image_size is not None:
        if left < 0.0:
            left = 0.0
        if top < 0.0:
            top = 0.0
        if right > image_size[0]:
            right = float(image_size[0])
        if bottom > image_size[1]:
            bottom = float(image_size[1])
        if right - left < MIN_VISIBLE_EXTENT or bottom - top < MIN_VISIBLE_EXTENT:
            return None
    elif right <= left or bottom <= top:
        return None
    return _box2d_unchecked(left, top, right, bottom)


def lidar_points_to_camera(points: np.ndarray, calib: Calibration) -> np.ndarray:
    """Transform (n, 3) LiDAR-frame points into rectified camera coordinates."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    tr = calib.lidar_to_camera
    cam = pts @ tr[:, :3].T + tr[:, 3]
    return cam @ calib.rectification.T


def _corner_array(boxes: list, indices: list[int]) -> np.ndarray:
    it = (v for i in indices for v in (boxes[i].left, boxes[i].top,
                                       boxes[i].right, boxes[i].bottom))
    return np.fromiter(it, dtype=float, count=4 * len(indices)).reshape(-1, 4)


def iou_matrix(boxes_a: list[Box2D | None], boxes_b: list[Box2D | None]) -> np.ndarray:
    """Pairwise IoU as an (len(a), len(b)) array; pairs with a missing box get 0."""
    m, n = len(boxes_a), len(boxes_b)
    ia = [i for i, b in enumerate(boxes_a) if b is not None]
    ib = [j for j, b in enumerate(boxes_b) if b is not None]
    if not ia or not ib:
        return np.zeros((m, n))
    a = _corner_array(boxes_a, ia)
    b = _corner_array(boxes_b, ib)
    iw = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    ih = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    np.clip(iw, 0.0, None, out=iw)
    np.clip(ih, 0.0, None, out=ih)
    inter = iw * ih
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    iou = inter / (area_a[:, None] + area_b[None, :] - inter)
    if len(ia) == m and len(ib) == n:
        return iou
    out = np.zeros((m, n))
    out[np.ix_(ia, ib)] = iou
    return out


def distance_matrix(boxes_a: list[Box3D | None], boxes_b: list[Box3D | None]) -> np.ndarray:
    """Pairwise centroid distances; pairs with a missing box get +inf."""
    m, n = len(boxes_a), len(boxes_b)
    ia = [i for i, b in enumerate(boxes_a) if b is not None]
    ib = [j for j, b in enumerate(boxes_b) if b is not None]
    if not ia or not ib:
        return np.full((m, n), np.inf)

    def centers(boxes, indices):
        it = (v for i in indices for v in (boxes[i].center_x, boxes[i].center_y,
                                           boxes[i].center_z))
        return np.fromiter(it, dtype=float, count=3 * len(indices)).reshape(-1, 3)

    a = centers(boxes_a, ia)
    b = centers(boxes_b, ib)
    diff = a[:, None, :] - b[None, :, :]
    dist = np.sqrt(diff[:, :, 0] ** 2 + diff[:, :, 1] ** 2 + diff[:, :, 2] ** 2)
    if len(ia) == m and len(ib) == n:
        return dist
    out = np.full((m, n), np.inf)
    out[np.ix_(ia, ib)] = dist
    return out


_RECT_KEYS = ("R_rect", "R0_rect")
_LIDAR_KEYS = ("Tr_velo_cam", "Tr_velo_to_cam")


def parse_calibration(text: str) -> Calibration:
    """Parse the KITTI tracking calibration text layout.

    Expects a ``P2`` line with 12 floats, an ``R_rect`` (or ``R0_rect``)
    line with 9, and a ``Tr_velo_cam`` (or ``Tr_velo_to_cam``) line with 12.
    Keys may carry a trailing colon; unknown lines are ignored.
    """
    values: dict[str, list[float]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        key = key.rstrip(":")
        try:
            numbers = [float(tok) for tok in rest.split()]
        except ValueError as exc:
            raise ParseError(f"bad calibration value ({exc})", lineno) from None
        values[key] = numbers

    def take(keys, count, shape):
        for key in keys:
            if key in values:
                nums = values[key]
                if len(nums) != count:
                    raise ParseError(f"{key} needs {count} values, got {len(nums)}")
                return np.array(nums).reshape(shape)
        raise ParseError(f"missing calibration key (one of {', '.join(keys)})")

    projection = take(("P2",), 12, (3, 4))
    rectification = take(_RECT_KEYS, 9, (3, 3))
    lidar_to_camera = take(_LIDAR_KEYS, 12, (3, 4))
    try:
        return Calibration(projection, rectification, lidar_to_camera)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def format_calibration(calib: Calibration) -> str:
    """Serialize a Calibration in the text layout accepted by parse_calibration."""
    def row(values):
        return " ".join(f"{v:.12e}" for v in values)

    return (
        f"P2: {row(calib.projection.ravel())}\n"
        f"R_rect {row(calib.rectification.ravel())}\n"
        f"Tr_velo_cam {row(calib.lidar_to_camera.ravel())}\n"
    )
