"""Detection file parsing and per-frame 2D/3D unification.

Detection files are whitespace-separated text, one detection per line,
``#`` comments allowed:

    2D:  frame category score left top right bottom
    3D:  frame category score h w l x y z yaw

3D rows follow the KITTI label convention: camera rectified coordinates
with (x, y, z) at the center of the bottom face; parsing converts y to the
cuboid centroid (y - h/2) and writers apply the inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ParseError
from .geometry import Box2D, Box3D, Calibration, iou_matrix, project_box3d, wrap_angle

SOURCE_CAMERA = "camera-only"
SOURCE_LIDAR = "lidar-only"
SOURCE_FUSED = "fused"
_SOURCES = (SOURCE_CAMERA, SOURCE_LIDAR, SOURCE_FUSED)


@dataclass(slots=True)
class Detection2D:
    frame: int
    box: Box2D
    score: float
    category: str


@dataclass(slots=True)
class Detection3D:
    frame: int
    box: Box3D
    score: float
    category: str


@dataclass(slots=True)
class Observation:
    """One unified per-frame object: a 2D box, a 3D box, or both.

    ``source`` records which sensors actually measured it. A lidar-only
    observation may still carry a projection-derived ``box2d``.
    """

    box2d: Box2D | None
    box3d: Box3D | None
    score: float
    category: str
    source: str

    def __post_init__(self):
        if self.source not in _SOURCES:
            raise ValueError(f"unknown observation source: {self.source}")
        if self.source == SOURCE_CAMERA and (self.box2d is None or self.box3d is not None):
            raise ValueError("camera-only observation must have exactly a 2D box")
        if self.source == SOURCE_LIDAR and self.box3d is None:
            raise ValueError("lidar-only observation must have a 3D box")
        if self.source == SOURCE_FUSED and (self.box2d is None or self.box3d is None):
            raise ValueError("fused observation must have both boxes")


def _lines(stream):
    if isinstance(stream, str):
        return stream.splitlines()
    return stream


def _parse_common(tokens, lineno, n_fields):
    if len(tokens) != n_fields:
        raise ParseError(f"expected {n_fields} fields, got {len(tokens)}", lineno)
    try:
        frame = int(tokens[0])
    except ValueError:
        raise ParseError(f"bad frame index {tokens[0]!r}", lineno) from None
    if frame < 0:
        raise ParseError(f"negative frame index {frame}", lineno)
    category = tokens[1]
    try:
        score = float(tokens[2])
    except ValueError:
        raise ParseError(f"bad score {tokens[2]!r}", lineno) from None
    if not math.isfinite(score):
        raise ParseError(f"non-finite score {score}", lineno)
    return frame, category, score


def parse_detections_2d(stream) -> dict[int, list[Detection2D]]:
    """Parse 2D detections grouped by frame, preserving in-frame file order."""
    by_frame: dict[int, list[Detection2D]] = {}
    for lineno, raw in enumerate(_lines(stream), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        frame, category, score = _parse_common(tokens, lineno, 7)
        try:
            box = Box2D(*(float(t) for t in tokens[3:7]))
        except ValueError as exc:
            raise ParseError(f"bad 2D box ({exc})", lineno) from None
        by_frame.setdefault(frame, []).append(Detection2D(frame, box, score, category))
    return by_frame


def parse_detections_3d(stream) -> dict[int, list[Detection3D]]:
    """Parse 3D detections grouped by frame, preserving in-frame file order."""
    by_frame: dict[int, list[Detection3D]] = {}
    for lineno, raw in enumerate(_lines(stream), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        frame, category, score = _parse_common(tokens, lineno, 10)
        try:
            h, w, l, x, y, z, yaw = (float(t) for t in tokens[3:10])
            box = Box3D(center_x=x, center_y=y - 0.5 * h, center_z=z,
                        height=h, width=w, length=l, yaw=wrap_angle(yaw))
        except ValueError as exc:
            raise ParseError(f"bad 3D box ({exc})", lineno) from None
        by_frame.setdefault(frame, []).append(Detection3D(frame, box, score, category))
    return by_frame


def unify(frame_2d: list[Detection2D], frame_3d: list[Detection3D],
          calib: Calibration, iou_gate: float,
          image_size: tuple[int, int] | None = None) -> list[Observation]:
    """Merge one frame's 2D and 3D detections into a duplicate-free set.

    Every 3D detection is projected into the image; projections are paired
    with same-category 2D detections greedily by decreasing IoU (each
    detection used at most once, IoU must reach ``iou_gate``). Paired
    detections become one fused observation carrying both boxes with the
    stronger score; everything else passes through as a single-sensor
    observation. Projections behind the camera never pair.

    Output order: 2D detections in file order (fused in place), then the
    remaining 3D detections in file order.
    """
    projected = [project_box3d(det.box, calib, image_size) for det in frame_3d]
    candidates = []
    if frame_2d and frame_3d:
        ious = iou_matrix([det.box for det in frame_2d], projected)
        for i, det2 in enumerate(frame_2d):
            row = ious[i]
            for j, det3 in enumerate(frame_3d):
                if row[j] >= iou_gate and det2.category == det3.category:
                    candidates.append((row[j], i, j))
    # Greedy best-IoU pairing; ties break toward lower indices.
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
    paired_2d: dict[int, int] = {}
    used_3d: set[int] = set()
    for _, i, j in candidates:
        if i in paired_2d or j in used_3d:
            continue
        paired_2d[i] = j
        used_3d.add(j)

    observations = []
    for i, det2 in enumerate(frame_2d):
        if i in paired_2d:
            det3 = frame_3d[paired_2d[i]]
            observations.append(Observation(
                box2d=det2.box, box3d=det3.box,
                score=max(det2.score, det3.score),
                category=det2.category, source=SOURCE_FUSED))
        else:
            observations.append(Observation(
                box2d=det2.box, box3d=None, score=det2.score,
                category=det2.category, source=SOURCE_CAMERA))
    for j, det3 in enumerate(frame_3d):
        if j not in used_3d:
            observations.append(Observation(
                box2d=None, box3d=det3.box, score=det3.score,
                category=det3.category, source=SOURCE_LIDAR))
    return observations


def mono_detector_expand(observations: list[Observation], calib: Calibration,
                         image_size: tuple[int, int] | None = None) -> list[Observation]:
    """Derive the missing 2D box for lidar-only observations by projection.

    The source stays lidar-only so downstream weighting can tell derived
    boxes from measured ones. Camera-only observations pass through; lifting
    a 2D box to 3D would need point-cloud data and is not supported.
    """
    expanded = []
    for obs in observations:
        if obs.source == SOURCE_LIDAR and obs.box2d is None:
            derived = project_box3d(obs.box3d, calib, image_size)
            expanded.append(replace(obs, box2d=derived) if derived is not None else obs)
        else:
            expanded.append(obs)
    return expanded
