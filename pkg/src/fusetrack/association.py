"""Per-sensor affinity matrices, their weighted fusion, and greedy assignment.

Affinity matrices are plain float arrays of shape (observations, tracks)
with entries in [0, 1]. In the camera matrix higher is better and 0 means
"cannot match"; the LiDAR matrix stores gate-normalized centroid distances,
so 0 is a perfect match and 1 means "cannot match". Fusion flips the LiDAR
matrix so that in the fused matrix 1 is always the best score.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .geometry import Box2D, Box3D, distance_matrix, iou_matrix


@dataclass(slots=True)
class AssignmentResult:
    """Outcome of one frame's matching.

    ``matches`` holds (observation index, track index, fused score) triples;
    the index lists cover everything left unmatched.
    """

    matches: list[tuple[int, int, float]] = field(default_factory=list)
    unmatched_observations: list[int] = field(default_factory=list)
    unmatched_tracks: list[int] = field(default_factory=list)


def build_camera_matrix(observation_boxes: list[Box2D | None],
                        track_boxes: list[Box2D | None],
                        iou_gate: float) -> np.ndarray:
    """IoU affinities between observed and predicted image boxes.

    Entries below ``iou_gate`` are zeroed; pairs where either side has no
    2D box take the camera no-match value 0.
    """
    if not 0.0 < iou_gate < 1.0:
        raise ConfigurationError(f"camera IoU gate must be in (0, 1), got {iou_gate}")
    matrix = iou_matrix(observation_boxes, track_boxes)
    matrix[matrix < iou_gate] = 0.0
    return matrix


def build_lidar_matrix(observation_boxes: list[Box3D | None],
                       track_boxes: list[Box3D | None],
                       distance_gate: float) -> np.ndarray:
    """Gate-normalized centroid distances between observed and predicted cuboids.

    Raw distances are clamped at ``distance_gate`` then divided by it, so
    entries lie in [0, 1] with 1 meaning "not matchable". Pairs where either
    side has no 3D box take that no-match value.
    """
    if distance_gate <= 0.0:
        raise ConfigurationError(f"LiDAR distance gate must be positive, got {distance_gate}")
    distances = distance_matrix(observation_boxes, track_boxes)
    return np.minimum(distances, distance_gate) / distance_gate


def fuse(camera_matrix: np.ndarray, lidar_matrix: np.ndarray,
         camera_weight: float, lidar_weight: float) -> np.ndarray:
    """Convex per-entry blend of the two sensors' affinities.

    The LiDAR matrix is flipped (1 - entry) so both contributions agree that
    1 is a certain match. Weights must be non-negative and sum to 1.
    """
    if camera_matrix.shape != lidar_matrix.shape:
        raise ValueError(
            f"affinity matrices disagree in shape: {camera_matrix.shape} vs {lidar_matrix.shape}")
    if camera_weight < 0.0 or lidar_weight < 0.0 or abs(camera_weight + lidar_weight - 1.0) > 1e-9:
        raise ConfigurationError(
            f"sensor weights must be non-negative and sum to 1, "
            f"got {camera_weight} + {lidar_weight}")
    return camera_weight * camera_matrix + lidar_weight * (1.0 - lidar_matrix)


def greedy_assign(fused_matrix: np.ndarray, fusion_gate: float) -> AssignmentResult:
    """Repeatedly take the global maximum of the fused matrix.

    Each round scans the whole remaining matrix for its largest entry; if it
    is at least ``fusion_gate`` the pair is matched and its row and column
    are excluded, otherwise the procedure terminates. Ties break toward the
    lowest observation index, then the lowest track index.
    """
    if not 0.0 < fusion_gate < 1.0:
        raise ConfigurationError(f"fusion gate must be in (0, 1), got {fusion_gate}")
    m, n = fused_matrix.shape
    result = AssignmentResult()
    if m == 0 or n == 0:
        result.unmatched_observations = list(range(m))
        result.unmatched_tracks = list(range(n))
        return result

    remaining = fused_matrix.astype(float, copy=True)
    open_rows = np.ones(m, dtype=bool)
    open_cols = np.ones(n, dtype=bool)
    for _ in range(min(m, n)):
        flat = int(np.argmax(remaining))  # row-major argmax = lowest row, then column
        row, col = divmod(flat, n)
        score = remaining[row, col]
        if score < fusion_gate:
            break
        result.matches.append((row, col, float(score)))
        open_rows[row] = False
        open_cols[col] = False
        remaining[row, :] = -np.inf
        remaining[:, col] = -np.inf
    result.unmatched_observations = [i for i in range(m) if open_rows[i]]
    result.unmatched_tracks = [j for j in range(n) if open_cols[j]]
    return result
