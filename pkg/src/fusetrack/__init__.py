"""Camera + LiDAR multi-object tracking with long-term occlusion memory.

The tracker ingests per-frame 2D and 3D detections, unifies them into one
observation set, associates observations with remembered tracks through
fused per-sensor affinity matrices, and maintains each track with
constant-acceleration Kalman filters over box corner points. Companion
modules provide KITTI-format I/O, CLEAR-MOT evaluation, and a synthetic
occlusion/distortion simulator.
"""

from .association import AssignmentResult, build_camera_matrix, build_lidar_matrix, fuse, greedy_assign
from .config import TrackerConfig, parse_config
from .errors import ConfigurationError, DataError, ParseError
from .geometry import (Box2D, Box3D, Calibration, box3d_corners, centroid_distance_3d,
                       iou_2d, parse_calibration, project_box3d)
from .ingest import (Detection2D, Detection3D, Observation, mono_detector_expand,
                     parse_detections_2d, parse_detections_3d, unify)
from .kalman import BoxState2D, BoxState3D, CornerFilter
from .kitti_io import TrackRow, format_rows, parse_rows
from .memory import Track, TrackStore, age_of
from .metrics import MotScore, evaluate
from .pipeline import FrameResult, ReportEntry, RunManifest, run_sequence, step, write_kitti
from .simulator import (DistortionSpec, GroundTruth, Occluder, Scenario, SceneObject,
                        degrade, generate_ground_truth, parse_scenario)

__version__ = "0.1.0"

__all__ = [
    "AssignmentResult", "Box2D", "Box3D", "BoxState2D", "BoxState3D", "Calibration",
    "ConfigurationError", "CornerFilter", "DataError", "Detection2D", "Detection3D",
    "DistortionSpec", "FrameResult", "GroundTruth", "MotScore", "Observation",
    "Occluder", "ParseError", "ReportEntry", "RunManifest", "Scenario", "SceneObject",
    "Track", "TrackRow", "TrackStore", "TrackerConfig", "age_of", "box3d_corners",
    "build_camera_matrix", "build_lidar_matrix", "centroid_distance_3d", "degrade",
    "evaluate", "format_rows", "fuse", "generate_ground_truth", "greedy_assign",
    "iou_2d", "mono_detector_expand", "parse_calibration", "parse_config",
    "parse_detections_2d", "parse_detections_3d", "parse_rows", "parse_scenario",
    "project_box3d", "run_sequence", "step", "unify", "write_kitti",
]
