"""Shared fixtures-in-spirit: scenario builders and end-to-end run helpers."""

from __future__ import annotations

from pathlib import Path

from fusetrack.config import TrackerConfig
from fusetrack.geometry import Calibration, format_calibration
from fusetrack.kitti_io import TrackRow, format_rows, parse_rows
from fusetrack.pipeline import FrameResult, RunManifest, run_sequence, write_kitti
from fusetrack.simulator import (DistortionSpec, GroundTruth, Occluder, Scenario,
                                 SceneObject, degrade, make_pinhole_calibration)

IMAGE_SIZE = (1242, 375)


def pinhole() -> Calibration:
    return make_pinhole_calibration(700.0, 700.0, 621.0, 187.5)


def tracker_config(**overrides) -> TrackerConfig:
    base = dict(image_width=IMAGE_SIZE[0], image_height=IMAGE_SIZE[1])
    base.update(overrides)
    return TrackerConfig(**base)


def keystone_scenario() -> Scenario:
    """Six cars, 240 frames, one frustum exit of ~16 frames, one despawn."""
    objects = [
        SceneObject("Car", 0, 240, (-4.0, 0.8, 9.0), (0.02, 0.0, 0.01)),
        SceneObject("Car", 0, 240, (4.0, 0.8, 40.0), (0.0, 0.0, -0.11)),
        SceneObject("Car", 0, 240, (-2.0, 0.8, 12.0), (0.01, 0.0, 0.1)),
        SceneObject("Car", 0, 240, (6.0, 0.8, 25.0), (-0.05, 0.0, 0.0)),
        # Exits the right image border near frame 47, turns around while
        # unseen by the camera, and re-enters around frame 63.
        SceneObject("Car", 0, 115, (-6.0, 0.8, 14.0), (0.45, 0.0, 0.0),
                    accelerations=[(50, (-0.09, 0.0, 0.0)), (60, (0.0, 0.0, 0.0))]),
        SceneObject("Car", 40, 240, (-7.0, 0.8, 30.0), (0.06, 0.0, -0.05)),
    ]
    return Scenario(length=240, calib=pinhole(), image_size=IMAGE_SIZE, objects=objects)


def occluded_crossing_scenario() -> Scenario:
    """Eight cars crossing a shared occluder slab at staggered times."""
    lanes = [
        (9.0, 0.45, 0), (12.0, 0.55, 10), (15.0, 0.40, 25), (18.0, 0.60, 40),
        (22.0, 0.50, 60), (26.0, 0.45, 80), (30.0, 0.55, 100), (35.0, 0.40, 118),
    ]
    objects = []
    for z, speed, spawn in lanes:
        x_edge = 0.887 * z + 3.0
        duration = min(int(2 * x_edge / speed), 200 - spawn - 1)
        objects.append(SceneObject(
            "Car", spawn, spawn + duration, (-x_edge, 0.8, z), (speed, 0.0, 0.0)))
    occluders = [Occluder(0, 200, (-2.0, 2.5, -5.0, 5.0, 5.0, 60.0))]
    return Scenario(length=200, calib=pinhole(), image_size=IMAGE_SIZE,
                    objects=objects, occluders=occluders)


def single_object_scenario(length: int = 120) -> Scenario:
    obj = SceneObject("Car", 0, length, (-2.0, 0.8, 18.0), (0.05, 0.0, 0.02))
    return Scenario(length=length, calib=pinhole(), image_size=IMAGE_SIZE, objects=[obj])


def write_inputs(tmp_path: Path, gt: GroundTruth, spec: DistortionSpec,
                 tag: str = "seq") -> dict[str, Path]:
    det2d, det3d = degrade(gt, spec)
    paths = {
        "det2d": tmp_path / f"{tag}_det2d.txt",
        "det3d": tmp_path / f"{tag}_det3d.txt",
        "calib": tmp_path / f"{tag}_calib.txt",
        "gt": tmp_path / f"{tag}_gt.txt",
    }
    paths["det2d"].write_text(det2d)
    paths["det3d"].write_text(det3d)
    paths["calib"].write_text(format_calibration(gt.scenario.calib))
    paths["gt"].write_text(format_rows(gt.to_rows()))
    return paths


def run_tracker(tmp_path: Path, gt: GroundTruth, spec: DistortionSpec,
                config: TrackerConfig | None = None, tag: str = "seq",
                det2d: bool = True, det3d: bool = True,
                ) -> tuple[list[FrameResult], RunManifest, list[TrackRow], list[TrackRow]]:
    """Degrade, write files, track, and parse everything back."""
    paths = write_inputs(tmp_path, gt, spec, tag)
    config = config if config is not None else tracker_config()
    results, manifest = run_sequence(
        paths["det2d"] if det2d else None,
        paths["det3d"] if det3d else None,
        paths["calib"], config, sequence_name=tag)
    hyp_rows = parse_rows(write_kitti(results))
    gt_rows = parse_rows(paths["gt"].read_text())
    return results, manifest, hyp_rows, gt_rows
