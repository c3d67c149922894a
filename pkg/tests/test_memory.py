import pytest

from fusetrack.association import AssignmentResult
from fusetrack.config import TrackerConfig
from fusetrack.errors import ConfigurationError
from fusetrack.geometry import Box2D, Box3D
from fusetrack.ingest import SOURCE_CAMERA, SOURCE_FUSED, SOURCE_LIDAR, Observation
from fusetrack.memory import Track, TrackStore, age_of


def obs_fused(x=0.0, z=15.0, score=0.9):
    box3 = Box3D(x, 0.5, z, 1.5, 1.8, 4.2)
    box2 = Box2D(500 + 10 * x, 150, 560 + 10 * x, 200)
    return Observation(box2, box3, score, "Car", SOURCE_FUSED)


def obs_lidar(x=0.0, z=15.0, score=0.8):
    return Observation(None, Box3D(x, 0.5, z, 1.5, 1.8, 4.2), score, "Car", SOURCE_LIDAR)


def obs_camera(score=0.7):
    return Observation(Box2D(100, 100, 160, 150), None, score, "Car", SOURCE_CAMERA)


def store(**overrides):
    return TrackStore(TrackerConfig(**overrides))


def integrate_all_new(s, observations):
    assignment = AssignmentResult(
        matches=[], unmatched_observations=list(range(len(observations))),
        unmatched_tracks=list(range(len(s.tracks))))
    return s.integrate(assignment, observations)


def match_single(s, obs, track_index=0):
    assignment = AssignmentResult(
        matches=[(0, track_index, 1.0)],
        unmatched_observations=[],
        unmatched_tracks=[i for i in range(len(s.tracks)) if i != track_index])
    return s.integrate(assignment, [obs])


class TestCreation:
    def test_three_new_tracks_get_sequential_ids(self):
        s = store()
        records = integrate_all_new(s, [obs_fused(0), obs_fused(4), obs_fused(8)])
        assert [r.track_id for r in records] == [1, 2, 3]
        assert [t.track_id for t in s.tracks] == [1, 2, 3]
        assert s.tracks_created == 3

    def test_new_track_reports_measurement_boxes(self):
        s = store()
        o = obs_fused()
        record = integrate_all_new(s, [o])[0]
        assert record.box2d == o.box2d
        assert record.box3d == o.box3d

    def test_ids_never_reused_after_prune(self):
        s = store(max_age=1)
        integrate_all_new(s, [obs_fused()])
        for _ in range(3):
            s.integrate(AssignmentResult(unmatched_tracks=list(range(len(s.tracks)))), [])
            s.prune()
        assert s.tracks == []
        records = integrate_all_new(s, [obs_fused()])
        assert records[0].track_id == 2

    def test_min_hits_suppresses_young_tracks(self):
        s = store(min_hits=3)
        assert integrate_all_new(s, [obs_fused()]) == []
        assert match_single(s, obs_fused()) == []
        records = match_single(s, obs_fused())
        assert [r.track_id for r in records] == [1]


class TestMatchedUpdates:
    def test_fused_match_resets_both_counters(self):
        s = store()
        integrate_all_new(s, [obs_fused()])
        s.integrate(AssignmentResult(unmatched_tracks=[0]), [])
        track = s.tracks[0]
        assert track.frames_since_seen_2d == 1
        assert track.frames_since_seen_3d == 1
        match_single(s, obs_fused())
        assert track.frames_since_seen_2d == 0
        assert track.frames_since_seen_3d == 0
        assert track.hit_count == 2

    def test_lidar_only_match_on_dual_state_track(self):
        # 3D updated and predicted; 2D predicted only; counters (2D +1, 3D 0).
        s = store()
        integrate_all_new(s, [obs_fused()])
        track = s.tracks[0]
        before_2d = track.state2d.box
        record = match_single(s, obs_lidar())[0]
        assert track.frames_since_seen_2d == 1
        assert track.frames_since_seen_3d == 0
        assert record.box2d is None
        assert record.box3d is not None
        # 2D state coasted: with zero initial velocity it stays in place.
        assert track.state2d.box == before_2d

    def test_state_acquisition_when_new_sensor_appears(self):
        s = store()
        integrate_all_new(s, [obs_lidar()])
        track = s.tracks[0]
        assert track.state2d is None
        record = match_single(s, obs_fused())[0]
        assert track.state2d is not None
        assert record.box2d == obs_fused().box2d

    def test_score_tracks_latest_observation(self):
        s = store()
        integrate_all_new(s, [obs_fused(score=0.4)])
        match_single(s, obs_fused(score=0.95))
        assert s.tracks[0].last_score == 0.95


class TestAging:
    def test_age_is_min_of_counters(self):
        track = Track(1, "Car", state2d=object(), state3d=object(),
                      frames_since_seen_2d=5, frames_since_seen_3d=2)
        assert age_of(track) == 2
        track.frames_since_seen_2d = 0
        track.frames_since_seen_3d = 7
        assert age_of(track) == 0

    def test_mono_state_track_ages_by_its_only_sensor(self):
        track = Track(1, "Car", state2d=None, state3d=object(),
                      frames_since_seen_2d=0, frames_since_seen_3d=4)
        assert age_of(track) == 4

    def test_unmatched_track_ages_both_counters(self):
        s = store()
        integrate_all_new(s, [obs_fused()])
        for expected in (1, 2, 3):
            s.integrate(AssignmentResult(unmatched_tracks=[0]), [])
            assert s.tracks[0].frames_since_seen_2d == expected
            assert s.tracks[0].frames_since_seen_3d == expected


class TestPrune:
    def age_track_to(self, s, age):
        for _ in range(age):
            s.integrate(AssignmentResult(unmatched_tracks=list(range(len(s.tracks)))), [])

    def test_nothing_removed_at_age_zero(self):
        s = store()
        integrate_all_new(s, [obs_fused(0), obs_fused(5)])
        assert len(s.prune()) == 2

    def test_boundary_age_retained(self):
        s = store(max_age=4)
        integrate_all_new(s, [obs_fused()])
        self.age_track_to(s, 4)
        assert s.tracks[0].age == 4
        assert len(s.prune()) == 1

    def test_age_beyond_boundary_removed(self):
        s = store(max_age=4)
        integrate_all_new(s, [obs_fused()])
        self.age_track_to(s, 5)
        assert s.prune() == []

    def test_mixed_ages(self):
        s = store(max_age=3)
        integrate_all_new(s, [obs_fused(0), obs_fused(5), obs_fused(10)])
        # Age the whole store once, then keep two tracks alive.
        s.integrate(AssignmentResult(unmatched_tracks=[0, 1, 2]), [])
        for _ in range(3):
            s.integrate(AssignmentResult(
                matches=[(0, 0, 1.0), (1, 1, 1.0)],
                unmatched_observations=[], unmatched_tracks=[2]),
                [obs_fused(0), obs_fused(5)])
        assert [t.age for t in s.tracks] == [0, 0, 4]
        survivors = s.prune()
        assert [t.track_id for t in survivors] == [1, 2]

    def test_prune_is_idempotent(self):
        s = store(max_age=2)
        integrate_all_new(s, [obs_fused()])
        self.age_track_to(s, 3)
        first = list(s.prune())
        assert s.prune() == first


class TestStoreInvariants:
    def test_exactly_touched_tracks_have_age_zero(self):
        s = store()
        integrate_all_new(s, [obs_fused(0), obs_fused(5), obs_fused(10)])
        # Match track 0, leave 1 and 2 unmatched, create one new track.
        s.integrate(AssignmentResult(
            matches=[(0, 0, 1.0)], unmatched_observations=[1],
            unmatched_tracks=[1, 2]),
            [obs_fused(0), obs_fused(20)])
        ages = {t.track_id: t.age for t in s.tracks}
        assert ages[1] == 0
        assert ages[2] == 1 and ages[3] == 1
        assert ages[4] == 0

    def test_live_ids_unique_and_increasing(self):
        s = store(max_age=2)
        seen = []
        for round_ in range(6):
            records = integrate_all_new(s, [obs_fused(3 * round_)])
            seen.extend(r.track_id for r in records)
            for _ in range(4):
                s.integrate(AssignmentResult(
                    unmatched_tracks=list(range(len(s.tracks)))), [])
                s.prune()
        ids = [t.track_id for t in s.tracks]
        assert len(ids) == len(set(ids))
        assert seen == sorted(seen)
        assert len(set(seen)) == len(seen)


class TestStaleAssignment:
    def test_bad_observation_indices(self):
        s = store()
        integrate_all_new(s, [obs_fused()])
        stale = AssignmentResult(matches=[(0, 0, 1.0)],
                                 unmatched_observations=[1], unmatched_tracks=[])
        with pytest.raises(ValueError, match="stale"):
            s.integrate(stale, [obs_fused()])

    def test_bad_track_indices(self):
        s = store()
        integrate_all_new(s, [obs_fused()])
        stale = AssignmentResult(matches=[], unmatched_observations=[],
                                 unmatched_tracks=[0, 1])
        with pytest.raises(ValueError, match="stale"):
            s.integrate(stale, [])


class TestConfigValidation:
    def test_weight_sum(self):
        with pytest.raises(ConfigurationError):
            TrackerConfig(camera_weight=0.8, lidar_weight=0.4)

    def test_gate_ranges(self):
        with pytest.raises(ConfigurationError):
            TrackerConfig(camera_iou_gate=0.0)
        with pytest.raises(ConfigurationError):
            TrackerConfig(fusion_gate=1.0)
        with pytest.raises(ConfigurationError):
            TrackerConfig(lidar_distance_gate=-2.0)

    def test_epsilon_at_least_one(self):
        with pytest.raises(ConfigurationError):
            TrackerConfig(max_age=0)

    def test_image_dims_must_pair(self):
        with pytest.raises(ConfigurationError):
            TrackerConfig(image_width=100)
