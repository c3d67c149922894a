"""Synthetic scenario generation and detection degradation.

Objects move with piecewise-constant acceleration integrated in closed form,
so ground-truth kinematics are exact. Occluders are space-time regions that
suppress all detections of objects whose center lies inside them; being
outside the camera frustum suppresses only the 2D box. Degradation applies
per-object-frame independent dropout plus Gaussian jitter, driven by a
seeded PCG64 generator so emitted files are byte-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError
from .geometry import Box2D, Box3D, Calibration, project_box3d, wrap_angle
from .kitti_io import TrackRow


@dataclass(slots=True)
class SceneObject:
    """One simulated object and its motion program.

    ``accelerations`` maps segment start frames (relative to the whole
    scenario clock) to constant acceleration vectors; motion before the
    first segment uses zero acceleration.
    """

    category: str
    spawn: int
    despawn: int
    position: tuple[float, float, float]
    velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)
    size: tuple[float, float, float] = (1.6, 1.8, 4.2)  # h, w, l
    yaw: float = 0.0
    accelerations: list[tuple[int, tuple[float, float, float]]] = field(default_factory=list)


@dataclass(slots=True)
class Occluder:
    """Axis-aligned spatial box active over [start, end) frames."""

    start: int
    end: int
    region: tuple[float, float, float, float, float, float]  # xmin xmax ymin ymax zmin zmax

    def contains(self, frame: int, point: tuple[float, float, float]) -> bool:
        if not self.start <= frame < self.end:
            return False
        x, y, z = point
        xmin, xmax, ymin, ymax, zmin, zmax = self.region
        return xmin <= x <= xmax and ymin <= y <= ymax and zmin <= z <= zmax


@dataclass(slots=True)
class Scenario:
    length: int
    calib: Calibration
    image_size: tuple[int, int]
    objects: list[SceneObject]
    occluders: list[Occluder] = field(default_factory=list)

    def __post_init__(self):
        for i, obj in enumerate(self.objects):
            if not obj.spawn < obj.despawn <= self.length:
                raise ValueError(
                    f"object {i}: need spawn < despawn <= length, "
                    f"got {obj.spawn} / {obj.despawn} / {self.length}")
            if min(obj.size) <= 0:
                raise ValueError(f"object {i}: non-positive size {obj.size}")
        for i, occ in enumerate(self.occluders):
            if not 0 <= occ.start < occ.end <= self.length:
                raise ValueError(f"occluder {i}: interval outside [0, length)")


@dataclass(slots=True)
class DistortionSpec:
    """Detector degradation: per-object-frame dropouts and box jitter."""

    dropout2d: float = 0.0
    dropout3d: float = 0.0
    jitter2d: float = 0.0
    jitter3d: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.dropout2d <= 1.0 or not 0.0 <= self.dropout3d <= 1.0:
            raise ValueError("dropout probabilities must be in [0, 1]")
        if self.jitter2d < 0.0 or self.jitter3d < 0.0:
            raise ValueError("jitter deviations must be non-negative")


@dataclass(slots=True)
class GtEntry:
    frame: int
    object_id: int
    category: str
    box3d: Box3D
    box2d: Box2D | None
    occluded: bool


@dataclass(slots=True)
class GroundTruth:
    scenario: Scenario
    entries: list[GtEntry]

    def by_frame(self) -> dict[int, list[GtEntry]]:
        grouped: dict[int, list[GtEntry]] = {}
        for e in self.entries:
            grouped.setdefault(e.frame, []).append(e)
        return grouped

    def to_rows(self) -> list[TrackRow]:
        """Ground truth as KITTI rows; occluder frames carry occluded = 1."""
        return [TrackRow(frame=e.frame, track_id=e.object_id, category=e.category,
                         box2d=e.box2d, box3d=e.box3d, score=1.0,
                         truncated=0, occluded=1 if e.occluded else 0)
                for e in self.entries]

    def trajectory(self, object_id: int) -> list[tuple[int, Box3D]]:
        return [(e.frame, e.box3d) for e in self.entries if e.object_id == object_id]


def state_at(obj: SceneObject, frame: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Exact position and velocity of an object at an integer frame.

    Integrates the piecewise-constant acceleration schedule segment by
    segment in closed form from the spawn frame.
    """
    if not obj.spawn <= frame < obj.despawn:
        raise ValueError(f"frame {frame} outside object lifetime")
    p = list(obj.position)
    v = list(obj.velocity)
    segments = sorted(obj.accelerations, key=lambda s: s[0])
    t = obj.spawn
    a = (0.0, 0.0, 0.0)
    for seg_start, seg_acc in segments:
        if seg_start >= frame:
            break
        bound = max(seg_start, obj.spawn)
        dt = bound - t
        if dt > 0:
            for k in range(3):
                p[k] += v[k] * dt + 0.5 * a[k] * dt * dt
                v[k] += a[k] * dt
            t = bound
        a = seg_acc
    dt = frame - t
    if dt > 0:
        for k in range(3):
            p[k] += v[k] * dt + 0.5 * a[k] * dt * dt
            v[k] += a[k] * dt
    return tuple(p), tuple(v)


def generate_ground_truth(scenario: Scenario) -> GroundTruth:
    """Exact per-frame boxes for every object, with frustum and occluder flags."""
    entries = []
    for frame in range(scenario.length):
        for index, obj in enumerate(scenario.objects):
            if not obj.spawn <= frame < obj.despawn:
                continue
            position, _ = state_at(obj, frame)
            h, w, l = obj.size
            box3d = Box3D(center_x=position[0], center_y=position[1],
                          center_z=position[2], height=h, width=w, length=l,
                          yaw=wrap_angle(obj.yaw))
            box2d = project_box3d(box3d, scenario.calib, scenario.image_size)
            occluded = any(occ.contains(frame, position) for occ in scenario.occluders)
            entries.append(GtEntry(frame=frame, object_id=index + 1,
                                   category=obj.category, box3d=box3d,
                                   box2d=box2d, occluded=occluded))
    return GroundTruth(scenario=scenario, entries=entries)


def degrade(gt: GroundTruth, spec: DistortionSpec) -> tuple[str, str]:
    """Emit degraded (2D text, 3D text) detection files from ground truth.

    Each object-frame independently loses its 2D box with probability
    ``dropout2d`` and its 3D box with ``dropout3d``; occluded frames always
    lose both. Survivors get zero-mean Gaussian noise (2D: per corner
    coordinate; 3D: on the centroid). Deterministic for a given seed.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    lines2d = []
    lines3d = []
    for entry in gt.entries:
        u2 = rng.random()
        u3 = rng.random()
        if entry.occluded:
            continue
        if entry.box2d is not None and u2 >= spec.dropout2d:
            left, top, right, bottom = entry.box2d.corners()
            if spec.jitter2d > 0.0:
                noise = rng.normal(0.0, spec.jitter2d, 4)
                left += noise[0]
                top += noise[1]
                right += noise[2]
                bottom += noise[3]
                left, right = min(left, right), max(left, right)
                top, bottom = min(top, bottom), max(top, bottom)
                right = max(right, left + 1e-3)
                bottom = max(bottom, top + 1e-3)
            lines2d.append(
                f"{entry.frame} {entry.category} 1.000000 "
                f"{left:.6f} {top:.6f} {right:.6f} {bottom:.6f}")
        if u3 >= spec.dropout3d:
            box = entry.box3d
            cx, cy, cz = box.center
            if spec.jitter3d > 0.0:
                noise = rng.normal(0.0, spec.jitter3d, 3)
                cx += noise[0]
                cy += noise[1]
                cz += noise[2]
            bottom_y = cy + 0.5 * box.height
            lines3d.append(
                f"{entry.frame} {entry.category} 1.000000 "
                f"{box.height:.6f} {box.width:.6f} {box.length:.6f} "
                f"{cx:.6f} {bottom_y:.6f} {cz:.6f} {box.yaw:.6f}")
    text2d = "\n".join(lines2d) + ("\n" if lines2d else "")
    text3d = "\n".join(lines3d) + ("\n" if lines3d else "")
    return text2d, text3d


def make_pinhole_calibration(fx: float, fy: float, cx: float, cy: float) -> Calibration:
    """A plain pinhole camera with identity rectification and extrinsics."""
    projection = np.array([[fx, 0.0, cx, 0.0],
                           [0.0, fy, cy, 0.0],
                           [0.0, 0.0, 1.0, 0.0]])
    return Calibration(projection)


def _floats(raw: str) -> list[float]:
    return [float(tok) for tok in raw.replace(",", " ").split()]


def _triple(key: str, raw: str) -> tuple[float, float, float]:
    nums = _floats(raw)
    if len(nums) != 3:
        raise ParseError(f"{key} needs 3 values, got {len(nums)}")
    return (nums[0], nums[1], nums[2])


def parse_scenario(text: str) -> Scenario:
    """Parse the flat key = value scenario format.

    Required keys: ``length``, ``camera.fx/fy/cx/cy/width/height`` and per
    object ``object.N.{category,spawn,despawn,position,size}``; optional
    ``object.N.{velocity,yaw}`` and repeated ``object.N.accel.K`` segments
    of the form ``start, ax, ay, az``. Occluders use
    ``occluder.N.frames = start, end`` and ``occluder.N.region = xmin, xmax,
    ymin, ymax, zmin, zmax``.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError("expected 'key = value'", lineno)
        values[key.strip()] = value.strip()

    def need(key):
        if key not in values:
            raise ParseError(f"missing scenario key {key!r}")
        return values.pop(key)

    try:
        length = int(need("length"))
        fx, fy = float(need("camera.fx")), float(need("camera.fy"))
        cx, cy = float(need("camera.cx")), float(need("camera.cy"))
        image_size = (int(need("camera.width")), int(need("camera.height")))

        objects = []
        index = 0
        while f"object.{index}.category" in values:
            prefix = f"object.{index}."
            accels = []
            k = 0
            while f"{prefix}accel.{k}" in values:
                nums = _floats(values.pop(f"{prefix}accel.{k}"))
                if len(nums) != 4:
                    raise ParseError(f"{prefix}accel.{k} needs 4 values")
                accels.append((int(nums[0]), (nums[1], nums[2], nums[3])))
                k += 1
            velocity = (0.0, 0.0, 0.0)
            if f"{prefix}velocity" in values:
                velocity = _triple(f"{prefix}velocity", values.pop(f"{prefix}velocity"))
            yaw = float(values.pop(f"{prefix}yaw", "0"))
            objects.append(SceneObject(
                category=values.pop(f"{prefix}category"),
                spawn=int(values.pop(f"{prefix}spawn")),
                despawn=int(values.pop(f"{prefix}despawn")),
                position=_triple(f"{prefix}position", values.pop(f"{prefix}position")),
                velocity=velocity,
                size=_triple(f"{prefix}size", values.pop(f"{prefix}size")),
                yaw=yaw,
                accelerations=accels,
            ))
            index += 1

        occluders = []
        index = 0
        while f"occluder.{index}.frames" in values:
            frames = _floats(values.pop(f"occluder.{index}.frames"))
            region = _floats(values.pop(f"occluder.{index}.region"))
            if len(frames) != 2 or len(region) != 6:
                raise ParseError(f"occluder.{index} needs 2 frame and 6 region values")
            occluders.append(Occluder(int(frames[0]), int(frames[1]), tuple(region)))
            index += 1
    except ParseError:
        raise
    except (ValueError, TypeError) as exc:
        raise ParseError(f"bad scenario value ({exc})") from None

    if values:
        raise ParseError(f"unknown scenario keys: {', '.join(sorted(values))}")
    try:
        return Scenario(length=length, calib=make_pinhole_calibration(fx, fy, cx, cy),
                        image_size=image_size, objects=objects, occluders=occluders)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def format_scenario(scenario: Scenario) -> str:
    """Serialize a scenario in the format accepted by parse_scenario."""

    def num(value) -> str:
        return repr(float(value))

    def triple(values) -> str:
        return ", ".join(num(v) for v in values)

    p = scenario.calib.projection
    lines = [
        f"length = {scenario.length}",
        f"camera.fx = {num(p[0, 0])}",
        f"camera.fy = {num(p[1, 1])}",
        f"camera.cx = {num(p[0, 2])}",
        f"camera.cy = {num(p[1, 2])}",
        f"camera.width = {scenario.image_size[0]}",
        f"camera.height = {scenario.image_size[1]}",
    ]
    for i, obj in enumerate(scenario.objects):
        prefix = f"object.{i}."
        lines.append(f"{prefix}category = {obj.category}")
        lines.append(f"{prefix}spawn = {obj.spawn}")
        lines.append(f"{prefix}despawn = {obj.despawn}")
        lines.append(f"{prefix}position = {triple(obj.position)}")
        lines.append(f"{prefix}velocity = {triple(obj.velocity)}")
        lines.append(f"{prefix}size = {triple(obj.size)}")
        lines.append(f"{prefix}yaw = {num(obj.yaw)}")
        for k, (start, acc) in enumerate(obj.accelerations):
            lines.append(f"{prefix}accel.{k} = {start}, {triple(acc)}")
    for i, occ in enumerate(scenario.occluders):
        lines.append(f"occluder.{i}.frames = {occ.start}, {occ.end}")
        lines.append(f"occluder.{i}.region = " + ", ".join(num(v) for v in occ.region))
    return "\n".join(lines) + "\n"
