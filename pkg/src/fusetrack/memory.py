"""Track memory: identity issuance, per-sensor bookkeeping, aging, pruning.

A track's age is the minimum over its sensors of "frames since that sensor
last observed it" (a sensor the track never acquired does not participate).
Tracks are dropped once their age strictly exceeds ``max_age``; identifiers
are never reused.
"""

from __future__ import annotations

from dataclasses import dataclass

from .association import AssignmentResult
from .config import TrackerConfig
from .geometry import Box2D, Box3D
from .ingest import Observation
from .kalman import BoxState2D, BoxState3D

_NEVER = float("inf")


@dataclass(slots=True)
class Track:
    """A remembered object: identity plus paired 2D/3D filter states."""

    track_id: int
    category: str
    state2d: BoxState2D | None = None
    state3d: BoxState3D | None = None
    frames_since_seen_2d: int = 0
    frames_since_seen_3d: int = 0
    hit_count: int = 0
    last_score: float = 0.0

    @property
    def age(self) -> int:
        """Frames since any sensor that tracks this object last saw it."""
        age2 = self.frames_since_seen_2d if self.state2d is not None else _NEVER
        age3 = self.frames_since_seen_3d if self.state3d is not None else _NEVER
        return min(age2, age3)

    @property
    def predicted_box2d(self) -> Box2D | None:
        return self.state2d.box if self.state2d is not None else None

    @property
    def predicted_box3d(self) -> Box3D | None:
        return self.state3d.box if self.state3d is not None else None


@dataclass(slots=True)
class ReportRecord:
    """Per-frame reporting snapshot of one matched (or newly created) track.

    ``box2d`` is the corrected image box when the camera observed the track
    this frame, else None. ``box3d`` is the corrected cuboid when LiDAR
    observed it, the current coasted estimate when only its state exists,
    else None.
    """

    track_id: int
    category: str
    score: float
    box2d: Box2D | None
    box3d: Box3D | None


def age_of(track: Track) -> int:
    return track.age


class TrackStore:
    """Single-writer store of live tracks for one sequence."""

    def __init__(self, config: TrackerConfig):
        self.config = config
        self.tracks: list[Track] = []
        self.next_id = 1
        self.tracks_created = 0

    def predicted_boxes_2d(self) -> list[Box2D | None]:
        return [t.predicted_box2d for t in self.tracks]

    def predicted_boxes_3d(self) -> list[Box3D | None]:
        return [t.predicted_box3d for t in self.tracks]

    def _new_state2d(self, box: Box2D) -> BoxState2D:
        cfg = self.config
        return BoxState2D(box, measurement_noise=cfg.measurement_noise_2d,
                          process_noise=cfg.process_noise,
                          initial_variance=cfg.initial_variance)

    def _new_state3d(self, box: Box3D) -> BoxState3D:
        cfg = self.config
        return BoxState3D(box, measurement_noise=cfg.measurement_noise_3d,
                          process_noise=cfg.process_noise,
                          initial_variance=cfg.initial_variance)

    def _absorb(self, track: Track, obs: Observation) -> ReportRecord:
        """Run the per-sensor update/predict cycle for one matched pair."""
        box2d = None
        box3d = None
        if obs.box2d is not None:
            if track.state2d is None:
                # State acquisition: start from the measurement, then advance.
                track.state2d = self._new_state2d(obs.box2d)
                box2d = obs.box2d
                track.state2d.predict()
            else:
                box2d = track.state2d.absorb(obs.box2d)
            track.frames_since_seen_2d = 0
        else:
            if track.state2d is not None:
                track.state2d.predict()
            track.frames_since_seen_2d += 1

        if obs.box3d is not None:
            if track.state3d is None:
                track.state3d = self._new_state3d(obs.box3d)
                box3d = obs.box3d
                track.state3d.predict()
            else:
                box3d = track.state3d.absorb(obs.box3d)
            track.frames_since_seen_3d = 0
        else:
            if track.state3d is not None:
                box3d = track.state3d.box  # coasted estimate for this frame
                track.state3d.predict()
            track.frames_since_seen_3d += 1

        track.hit_count += 1
        track.last_score = obs.score
        return ReportRecord(track.track_id, track.category, obs.score, box2d, box3d)

    def _create(self, obs: Observation) -> ReportRecord:
        track = Track(track_id=self.next_id, category=obs.category)
        self.next_id += 1
        self.tracks_created += 1
        if obs.box2d is not None:
            track.state2d = self._new_state2d(obs.box2d)
            track.state2d.predict()
        if obs.box3d is not None:
            track.state3d = self._new_state3d(obs.box3d)
            track.state3d.predict()
        track.hit_count = 1
        track.last_score = obs.score
        self.tracks.append(track)
        # A fresh state is the measurement itself, so report the input boxes.
        return ReportRecord(track.track_id, track.category, obs.score,
                            obs.box2d, obs.box3d)

    def integrate(self, assignment: AssignmentResult,
                  observations: list[Observation]) -> list[ReportRecord]:
        """Fold one frame's assignment into the store.

        Matched tracks update the observed sensor states and coast the
        others; unmatched observations found new tracks; unmatched tracks
        coast everything and age. Returns the reporting snapshot of tracks
        that were matched or created this frame and have enough hits.
        """
        self._check_indices(assignment, len(observations))
        touched: list[tuple[Track, ReportRecord]] = []
        for obs_idx, track_idx, _ in assignment.matches:
            track = self.tracks[track_idx]
            touched.append((track, self._absorb(track, observations[obs_idx])))
        for track_idx in assignment.unmatched_tracks:
            track = self.tracks[track_idx]
            if track.state2d is not None:
                track.state2d.predict()
            if track.state3d is not None:
                track.state3d.predict()
            track.frames_since_seen_2d += 1
            track.frames_since_seen_3d += 1
        for obs_idx in assignment.unmatched_observations:
            record = self._create(observations[obs_idx])
            touched.append((self.tracks[-1], record))
        min_hits = self.config.min_hits
        records = [rec for track, rec in touched if track.hit_count >= min_hits]
        records.sort(key=lambda r: r.track_id)
        return records

    def prune(self) -> list[Track]:
        """Drop tracks whose age strictly exceeds max_age; returns survivors."""
        max_age = self.config.max_age
        self.tracks = [t for t in self.tracks if t.age <= max_age]
        return self.tracks

    def _check_indices(self, assignment: AssignmentResult, n_observations: int) -> None:
        obs_seen = sorted([m[0] for m in assignment.matches]
                          + list(assignment.unmatched_observations))
        trk_seen = sorted([m[1] for m in assignment.matches]
                          + list(assignment.unmatched_tracks))
        if obs_seen != list(range(n_observations)) or trk_seen != list(range(len(self.tracks))):
            raise ValueError(
                "assignment is stale: its indices do not partition the current "
                f"{n_observations} observations x {len(self.tracks)} tracks")
