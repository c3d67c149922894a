"""Tracker configuration: thresholds, fusion weights, memory, and filter noise."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .errors import ConfigurationError


@dataclass(slots=True)
class TrackerConfig:
    """All tunables of the tracking pipeline.

    Attributes:
        camera_iou_gate: minimum IoU for a camera affinity to count.
        lidar_distance_gate: centroid distance (m) beyond which 3D pairs
            cannot match; also the normalizer of the LiDAR matrix.
        fusion_gate: minimum fused score for an assignment.
        camera_weight / lidar_weight: convex fusion weights (sum to 1).
        max_age: frames a track may go unseen (by its best sensor) before
            it is dropped from memory.
        min_hits: matched frames required before a track is reported.
        unify_iou_gate: IoU gate for 2D/3D detection unification; defaults
            to camera_iou_gate when unset.
        measurement_noise_2d / measurement_noise_3d: per-coordinate
            measurement variances (px^2 / m^2).
        process_noise: white-jerk intensity of the motion model.
        initial_variance: prior variance of unobserved velocity/acceleration.
        image_width / image_height: optional image bounds; when set,
            projected boxes are clipped to them.
    """

    camera_iou_gate: float = 0.3
    lidar_distance_gate: float = 5.0
    fusion_gate: float = 0.4
    camera_weight: float = 0.5
    lidar_weight: float = 0.5
    max_age: int = 30
    min_hits: int = 1
    unify_iou_gate: float | None = None
    measurement_noise_2d: float = 1.0
    measurement_noise_3d: float = 0.01
    process_noise: float = 0.1
    initial_variance: float = 1000.0
    image_width: int | None = None
    image_height: int | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not 0.0 < self.camera_iou_gate < 1.0:
            raise ConfigurationError(f"camera_iou_gate must be in (0, 1): {self.camera_iou_gate}")
        if self.lidar_distance_gate <= 0.0:
            raise ConfigurationError(
                f"lidar_distance_gate must be positive: {self.lidar_distance_gate}")
        if not 0.0 < self.fusion_gate < 1.0:
            raise ConfigurationError(f"fusion_gate must be in (0, 1): {self.fusion_gate}")
        if self.camera_weight < 0.0 or self.lidar_weight < 0.0:
            raise ConfigurationError("fusion weights must be non-negative")
        if abs(self.camera_weight + self.lidar_weight - 1.0) > 1e-9:
            raise ConfigurationError(
                f"fusion weights must sum to 1: {self.camera_weight} + {self.lidar_weight}")
        if self.max_age < 1:
            raise ConfigurationError(f"max_age must be at least 1: {self.max_age}")
        if self.min_hits < 1:
            raise ConfigurationError(f"min_hits must be at least 1: {self.min_hits}")
        if self.unify_iou_gate is not None and not 0.0 < self.unify_iou_gate < 1.0:
            raise ConfigurationError(f"unify_iou_gate must be in (0, 1): {self.unify_iou_gate}")
        for name in ("measurement_noise_2d", "measurement_noise_3d",
                     "process_noise", "initial_variance"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ConfigurationError(f"{name} must be a non-negative finite value: {value}")
        if (self.image_width is None) != (self.image_height is None):
            raise ConfigurationError("image_width and image_height must be set together")
        if self.image_width is not None and (self.image_width <= 0 or self.image_height <= 0):
            raise ConfigurationError("image dimensions must be positive")

    @property
    def image_size(self) -> tuple[int, int] | None:
        if self.image_width is None:
            return None
        return (self.image_width, self.image_height)

    @property
    def effective_unify_gate(self) -> float:
        return self.unify_iou_gate if self.unify_iou_gate is not None else self.camera_iou_gate

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_INT_FIELDS = {"max_age", "min_hits", "image_width", "image_height"}
_OPTIONAL_FIELDS = {"unify_iou_gate", "image_width", "image_height"}
_FIELD_NAMES = {f.name for f in fields(TrackerConfig)}


def _coerce(name: str, raw: str):
    raw = raw.strip()
    if name in _OPTIONAL_FIELDS and raw.lower() in ("none", ""):
        return None
    try:
        if name in _INT_FIELDS:
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigurationError(f"bad value for {name}: {raw!r}") from None


def parse_config(text: str, base: TrackerConfig | None = None) -> TrackerConfig:
    """Parse flat ``key = value`` lines into a TrackerConfig.

    ``#`` starts a comment; blank lines are skipped; unknown keys are errors.
    Values override ``base`` (or the defaults).
    """
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if key not in _FIELD_NAMES:
            raise ConfigurationError(f"line {lineno}: unknown configuration key {key!r}")
        overrides[key] = _coerce(key, value)
    config = base if base is not None else TrackerConfig()
    return replace(config, **overrides) if overrides else config


def apply_overrides(config: TrackerConfig, assignments: list[str]) -> TrackerConfig:
    """Apply ``key=value`` strings (e.g. from CLI flags) on top of a config."""
    overrides = {}
    for item in assignments:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in _FIELD_NAMES:
            raise ConfigurationError(f"bad override {item!r}; expected <known-key>=<value>")
        overrides[key] = _coerce(key, value)
    return replace(config, **overrides) if overrides else config
