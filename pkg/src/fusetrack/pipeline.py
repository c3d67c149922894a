"""Per-frame orchestration, sequence running, and result serialization."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .association import build_camera_matrix, build_lidar_matrix, fuse, greedy_assign
from .config import TrackerConfig
from .geometry import Box2D, Box3D, Calibration, parse_calibration, project_box3d
from .ingest import (SOURCE_CAMERA, SOURCE_LIDAR, Observation, mono_detector_expand,
                     parse_detections_2d, parse_detections_3d, unify)
from .kitti_io import TrackRow, format_rows
from .memory import TrackStore


@dataclass(slots=True)
class ReportEntry:
    track_id: int
    category: str
    box2d: Box2D | None
    box3d: Box3D | None
    score: float


@dataclass(slots=True)
class FrameResult:
    frame: int
    entries: list[ReportEntry]


@dataclass(slots=True)
class RunManifest:
    """Bookkeeping for one sequence run; timings cover tracking work only."""

    sequence: str
    config: dict
    frame_seconds: list[float] = field(default_factory=list)
    total_frames: int = 0
    tracks_created: int = 0

    @property
    def total_seconds(self) -> float:
        return sum(self.frame_seconds)

    def to_json(self) -> str:
        payload = {
            "sequence": self.sequence,
            "config": self.config,
            "total_frames": self.total_frames,
            "tracks_created": self.tracks_created,
            "tracker_seconds_total": self.total_seconds,
            "frame_seconds": self.frame_seconds,
        }
        return json.dumps(payload, indent=2)


def step(store: TrackStore, observations: list[Observation], frame: int,
         calib: Calibration | None, config: TrackerConfig,
         trace: list | None = None) -> FrameResult:
    """Associate one frame's observations with the store and update it.

    Builds both sensor affinity matrices against the store's current
    predictions, fuses them, runs the greedy assignment, folds the outcome
    into memory, and prunes aged tracks. When ``trace`` is a list, the
    (camera, lidar, fused) matrices of the frame are appended to it.
    """
    camera = build_camera_matrix(
        [o.box2d for o in observations], store.predicted_boxes_2d(),
        config.camera_iou_gate)
    lidar = build_lidar_matrix(
        [o.box3d for o in observations], store.predicted_boxes_3d(),
        config.lidar_distance_gate)
    fused = fuse(camera, lidar, config.camera_weight, config.lidar_weight)
    if trace is not None:
        trace.append((camera.copy(), lidar.copy(), fused.copy()))
    assignment = greedy_assign(fused, config.fusion_gate)
    records = store.integrate(assignment, observations)
    store.prune()

    entries = []
    image_size = config.image_size
    for rec in records:
        box2d = rec.box2d
        if box2d is None and rec.box3d is not None and calib is not None:
            # The camera missed this one; publish the LiDAR estimate's
            # projection so the track still has an image-plane footprint.
            box2d = project_box3d(rec.box3d, calib, image_size)
        entries.append(ReportEntry(rec.track_id, rec.category, box2d, rec.box3d, rec.score))
    return FrameResult(frame, entries)


def _read(path) -> str:
    return Path(path).read_text()


def run_sequence(det2d_path=None, det3d_path=None, calib_path=None,
                 config: TrackerConfig | None = None, *,
                 sequence_name: str = "sequence",
                 trace: list | None = None) -> tuple[list[FrameResult], RunManifest]:
    """Track a whole sequence from detection files.

    Give both detection files for fused tracking or exactly one for
    mono-detector mode (2D-only input is tracked as-is; 3D-only input gains
    projection-derived image boxes). Frames up to the largest index seen are
    processed; frames with no detections still age and prune the memory.
    Per-frame timings in the manifest exclude parsing and serialization.
    """
    if det2d_path is None and det3d_path is None:
        raise ValueError("at least one detection file is required")
    config = config if config is not None else TrackerConfig()
    calib = None
    if calib_path is not None:
        calib = calib_path if isinstance(calib_path, Calibration) \
            else parse_calibration(_read(calib_path))
    if calib is None and (det3d_path is not None):
        raise ValueError("3D detections require a calibration")

    frames_2d = parse_detections_2d(_read(det2d_path)) if det2d_path is not None else {}
    frames_3d = parse_detections_3d(_read(det3d_path)) if det3d_path is not None else {}
    multi = det2d_path is not None and det3d_path is not None
    last_frame = max([*frames_2d.keys(), *frames_3d.keys()], default=-1)

    store = TrackStore(config)
    manifest = RunManifest(sequence=sequence_name, config=config.as_dict())
    image_size = config.image_size
    unify_gate = config.effective_unify_gate
    results = []
    for frame in range(last_frame + 1):
        d2 = frames_2d.get(frame, [])
        d3 = frames_3d.get(frame, [])
        started = time.perf_counter()
        if multi:
            observations = unify(d2, d3, calib, unify_gate, image_size)
        elif det3d_path is not None:
            observations = mono_detector_expand(
                [Observation(box2d=None, box3d=det.box, score=det.score,
                             category=det.category, source=SOURCE_LIDAR) for det in d3],
                calib, image_size)
        else:
            observations = [Observation(box2d=det.box, box3d=None, score=det.score,
                                        category=det.category, source=SOURCE_CAMERA)
                            for det in d2]
        results.append(step(store, observations, frame, calib, config, trace))
        manifest.frame_seconds.append(time.perf_counter() - started)
    manifest.total_frames = last_frame + 1
    manifest.tracks_created = store.tracks_created
    return results, manifest


def results_to_rows(results: list[FrameResult]) -> list[TrackRow]:
    rows = []
    for fr in results:
        for e in fr.entries:
            rows.append(TrackRow(frame=fr.frame, track_id=e.track_id,
                                 category=e.category, box2d=e.box2d,
                                 box3d=e.box3d, score=e.score))
    return rows


def write_kitti(results: list[FrameResult]) -> str:
    """Serialize tracker output in the KITTI tracking format."""
    return format_rows(results_to_rows(results))
