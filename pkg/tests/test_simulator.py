import math

import numpy as np
import pytest

from helpers import IMAGE_SIZE, pinhole, single_object_scenario
from fusetrack.errors import ParseError
from fusetrack.ingest import parse_detections_2d, parse_detections_3d
from fusetrack.simulator import (DistortionSpec, Occluder, Scenario, SceneObject,
                                 degrade, format_scenario, generate_ground_truth,
                                 parse_scenario, state_at)


def scenario_with(objects, occluders=(), length=100):
    return Scenario(length=length, calib=pinhole(), image_size=IMAGE_SIZE,
                    objects=list(objects), occluders=list(occluders))


class TestKinematics:
    def test_static_object_stays_put(self):
        obj = SceneObject("Car", 0, 10, (1.0, 0.5, 20.0))
        gt = generate_ground_truth(scenario_with([obj], length=10))
        boxes = [e.box3d for e in gt.entries]
        assert len(boxes) == 10
        assert all(b.center == (1.0, 0.5, 20.0) for b in boxes)
        assert all(e.box2d == gt.entries[0].box2d for e in gt.entries)

    def test_constant_velocity_advances_exactly(self):
        obj = SceneObject("Car", 0, 10, (0.0, 0.5, 20.0), velocity=(1.0, 0.0, 0.0))
        gt = generate_ground_truth(scenario_with([obj], length=10))
        for k, entry in enumerate(gt.entries):
            assert entry.box3d.center_x == pytest.approx(float(k), abs=1e-12)

    def test_second_differences_equal_acceleration(self):
        obj = SceneObject("Car", 0, 60, (0.0, 0.5, 30.0),
                          velocity=(0.4, 0.0, -0.2),
                          accelerations=[(0, (0.01, 0.0, -0.005)),
                                         (30, (-0.02, 0.0, 0.01))])
        gt = generate_ground_truth(scenario_with([obj], length=60))
        xs = [e.box3d.center_x for e in gt.entries]
        zs = [e.box3d.center_z for e in gt.entries]
        for t in range(1, 59):
            if t < 29:
                ax, az = 0.01, -0.005
            elif t > 31:
                ax, az = -0.02, 0.01
            else:
                continue  # segment boundary frames mix accelerations
            assert xs[t + 1] - 2 * xs[t] + xs[t - 1] == pytest.approx(ax, abs=1e-9)
            assert zs[t + 1] - 2 * zs[t] + zs[t - 1] == pytest.approx(az, abs=1e-9)

    def test_state_at_respects_lifetime(self):
        obj = SceneObject("Car", 5, 10, (0.0, 0.0, 10.0))
        with pytest.raises(ValueError):
            state_at(obj, 4)
        with pytest.raises(ValueError):
            state_at(obj, 10)

    def test_spawn_window_respected(self):
        obj = SceneObject("Car", 3, 7, (0.0, 0.5, 20.0))
        gt = generate_ground_truth(scenario_with([obj], length=10))
        assert sorted(e.frame for e in gt.entries) == [3, 4, 5, 6]


class TestFrustum:
    def test_object_exiting_frustum_loses_2d_box(self):
        obj = SceneObject("Car", 0, 60, (0.0, 0.5, 12.0), velocity=(0.5, 0.0, 0.0))
        gt = generate_ground_truth(scenario_with([obj], length=60))
        with_2d = [e.frame for e in gt.entries if e.box2d is not None]
        without = [e.frame for e in gt.entries if e.box2d is None]
        assert with_2d and without
        assert min(without) > max(w for w in with_2d if w < min(without))
        # 3D boxes exist throughout.
        assert all(e.box3d is not None for e in gt.entries)


class TestOccluders:
    def occluded_scenario(self):
        obj = SceneObject("Car", 0, 40, (-6.0, 0.5, 20.0), velocity=(0.5, 0.0, 0.0))
        occ = Occluder(0, 40, (-2.0, 2.0, -5.0, 5.0, 5.0, 60.0))
        return scenario_with([obj], [occ], length=40)

    def test_entries_flagged_inside_region(self):
        gt = generate_ground_truth(self.occluded_scenario())
        for e in gt.entries:
            inside = -2.0 <= e.box3d.center_x <= 2.0
            assert e.occluded == inside

    def test_occluded_frames_drop_both_detections(self):
        gt = generate_ground_truth(self.occluded_scenario())
        det2d, det3d = degrade(gt, DistortionSpec(seed=1))
        frames2d = set(parse_detections_2d(det2d))
        frames3d = set(parse_detections_3d(det3d))
        occluded = {e.frame for e in gt.entries if e.occluded}
        assert occluded
        assert frames2d.isdisjoint(occluded)
        assert frames3d.isdisjoint(occluded)

    def test_gt_rows_carry_occlusion_flag(self):
        gt = generate_ground_truth(self.occluded_scenario())
        rows = gt.to_rows()
        assert {r.occluded for r in rows} == {0, 1}


class TestDegrade:
    def test_identity_degradation_preserves_boxes(self):
        gt = generate_ground_truth(single_object_scenario(30))
        det2d, det3d = degrade(gt, DistortionSpec(seed=9))
        parsed2 = parse_detections_2d(det2d)
        parsed3 = parse_detections_3d(det3d)
        for entry in gt.entries:
            d2 = parsed2[entry.frame][0]
            assert d2.box.corners() == pytest.approx(entry.box2d.corners(), abs=1e-6)
            d3 = parsed3[entry.frame][0]
            assert d3.box.center == pytest.approx(entry.box3d.center, abs=1e-6)

    def test_full_2d_dropout_empties_file(self):
        gt = generate_ground_truth(single_object_scenario(30))
        det2d, det3d = degrade(gt, DistortionSpec(dropout2d=1.0, seed=9))
        assert det2d == ""
        assert det3d != ""

    def test_byte_determinism(self):
        gt = generate_ground_truth(single_object_scenario(50))
        spec = DistortionSpec(dropout2d=0.4, dropout3d=0.2, jitter2d=2.0,
                              jitter3d=0.1, seed=1234)
        assert degrade(gt, spec) == degrade(gt, spec)

    def test_different_seeds_differ(self):
        gt = generate_ground_truth(single_object_scenario(50))
        a = degrade(gt, DistortionSpec(dropout2d=0.4, seed=1))
        b = degrade(gt, DistortionSpec(dropout2d=0.4, seed=2))
        assert a != b

    def test_dropout_counts_within_three_sigma(self):
        objects = [SceneObject("Car", 0, 100, (-6.0 + 1.5 * i, 0.5, 14.0 + 2.5 * i))
                   for i in range(10)]
        gt = generate_ground_truth(scenario_with(objects, length=100))
        assert len(gt.entries) == 1000
        det2d, _ = degrade(gt, DistortionSpec(dropout2d=0.5, seed=321))
        kept = sum(len(v) for v in parse_detections_2d(det2d).values())
        sigma = math.sqrt(1000 * 0.25)
        assert abs(kept - 500) <= 3 * sigma

    def test_jitter_keeps_boxes_valid(self):
        gt = generate_ground_truth(single_object_scenario(60))
        det2d, det3d = degrade(gt, DistortionSpec(jitter2d=25.0, jitter3d=1.0, seed=3))
        assert parse_detections_2d(det2d)
        assert parse_detections_3d(det3d)

    def test_validation(self):
        with pytest.raises(ValueError):
            DistortionSpec(dropout2d=1.5)
        with pytest.raises(ValueError):
            DistortionSpec(jitter3d=-0.1)


class TestScenarioFile:
    def test_round_trip(self):
        scenario = scenario_with(
            [SceneObject("Car", 0, 90, (0.0, 0.5, 20.0), velocity=(0.1, 0.0, 0.2),
                         size=(1.5, 1.8, 4.2), yaw=0.25,
                         accelerations=[(10, (0.01, 0.0, 0.0))])],
            [Occluder(5, 50, (-2.0, 2.0, -1.0, 1.0, 5.0, 30.0))])
        text = format_scenario(scenario)
        parsed = parse_scenario(text)
        assert parsed.length == scenario.length
        assert parsed.image_size == scenario.image_size
        assert parsed.objects == scenario.objects
        assert parsed.occluders == scenario.occluders
        assert np.allclose(parsed.calib.projection, scenario.calib.projection)

    def test_unknown_key_rejected(self):
        text = format_scenario(single_object_scenario(20)) + "object.0.colour = red\n"
        with pytest.raises(ParseError, match="unknown"):
            parse_scenario(text)

    def test_missing_key_rejected(self):
        with pytest.raises(ParseError, match="missing"):
            parse_scenario("length = 10\n")

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            scenario_with([SceneObject("Car", 5, 5, (0, 0, 10))])
        with pytest.raises(ValueError):
            scenario_with([], [Occluder(0, 200, (-1, 1, -1, 1, 0, 10))], length=100)
