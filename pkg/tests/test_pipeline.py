import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ogmmerge.errors import DegenerateGeometryError
from ogmmerge.grid import RigidTransform2D
from ogmmerge.pipeline import (
    CommonTagSet,
    MergeSolution,
    apply_two_step,
    baseline_rfid_only,
    closed_form_transform,
    gate_and_sort,
    kappa_band,
    ogm_solution,
    pre_icp_transform,
    quadrant_angle,
    select_kappa,
)
from ogmmerge.rfid import TagEstimate


def tagset(poses1, poses2, ids=(1, 2, 3)):
    return CommonTagSet(tuple((TagEstimate(i, tuple(a), 1.0), TagEstimate(i, tuple(b), 1.0))
                              for i, a, b in zip(ids, poses1, poses2)))


def tables(probs):
    t1 = [TagEstimate(i, (i, 0), a) for i, (a, _) in probs.items()]
    t2 = [TagEstimate(i, (0, i), b) for i, (_, b) in probs.items()]
    return t1, t2


class TestGate:
    def test_worked_example_sorting(self):
        t1, t2 = tables({5: (0.82, 0.92), 7: (0.99, 0.76), 9: (0.91, 0.92)})
        tags = gate_and_sort(t1, t2)
        assert tags.tag_ids == (9, 5, 7)
        assert [tags.min_probability(j) for j in range(3)] == [0.91, 0.82, 0.76]

    def test_two_common_tags_not_ready(self):
        t1, t2 = tables({5: (0.95, 0.95), 7: (0.99, 0.96)})
        t1.append(TagEstimate(8, (1, 1), 0.99))
        assert gate_and_sort(t1, t2) is None

    def test_weak_anchor_not_ready(self):
        t1, t2 = tables({1: (0.85, 0.95), 2: (0.80, 0.99), 3: (0.99, 0.78)})
        assert gate_and_sort(t1, t2) is None

    def test_ties_broken_by_tag_id(self):
        t1, t2 = tables({8: (0.95, 0.95), 3: (0.95, 0.96), 5: (0.95, 0.99)})
        assert gate_and_sort(t1, t2).tag_ids == (3, 5, 8)

    def test_accepts_dicts_and_pairs_poses(self):
        t1, t2 = tables({1: (0.95, 0.95), 2: (0.9, 0.96), 3: (0.99, 0.8)})
        tags = gate_and_sort({t.tag_id: t for t in t1}, {t.tag_id: t for t in t2})
        assert tags.poses(1).tolist() == [[1, 0], [2, 0], [3, 0]]
        assert tags.poses(2).tolist() == [[0, 1], [0, 2], [0, 3]]
        with pytest.raises(ValueError):
            tags.poses(3)

    @given(st.dictionaries(st.integers(0, 20), st.tuples(st.floats(0, 1), st.floats(0, 1)), max_size=10))
    @settings(max_examples=200, deadline=None)
    def test_output_satisfies_invariants(self, probs):
        tags = gate_and_sort(*tables(probs))
        qualified = [i for i, (a, b) in probs.items() if min(a, b) >= 0.75]
        if tags is None:
            best = max((min(probs[i]) for i in qualified), default=0.0)
            assert len(qualified) < 3 or best < 0.90
            return
        lows = [tags.min_probability(j) for j in range(3)]
        assert all(p.probability >= 0.75 for pair in tags.pairs for p in pair)
        assert lows[0] >= 0.90
        assert lows == sorted(lows, reverse=True)
        assert all(a.tag_id == b.tag_id for a, b in tags.pairs)


class TestQuadrantAngle:
    def test_midpoint_direction(self):
        tags = tagset([(0, 0), (2, 0), (1, 5)], [(0, 0), (2, 0), (3, 0)])
        assert quadrant_angle(tags, 1) == pytest.approx(90.0)
        assert quadrant_angle(tags, 2) == pytest.approx(0.0)

    def test_degenerate(self):
        tags = tagset([(0, 0), (2, 0), (1, 0)], [(0, 0), (2, 0), (1, 0)])
        with pytest.raises(DegenerateGeometryError):
            quadrant_angle(tags, 1)


class TestKappa:
    @pytest.mark.parametrize("angle, kappa", [(0, 0), (90, 1), (-170, 2), (180, 2), (250, 3), (310, 3),
                                              (45, 0), (135, 1), (215, 2), (-45, 0), (315, 0), (-46, 3)])
    def test_bands(self, angle, kappa):
        assert kappa_band(angle) == kappa

    def test_select_uses_difference(self):
        assert select_kappa(100.0, 10.0) == 1
        assert select_kappa(10.0, 100.0) == 3

    @given(st.floats(-720, 720, allow_nan=False), st.integers(0, 3))
    @settings(max_examples=300, deadline=None)
    def test_quarter_turn_shifts_kappa(self, theta, k):
        # Band edges sit at 35 and 45 degrees modulo 90.
        assume(not 30.0 <= theta % 90.0 <= 50.0)
        assert select_kappa(theta + 90.0 * k, 0.0) == (select_kappa(theta, 0.0) + k) % 4


def exact_pair(quarter, shift, poses1):
    """Tag poses of map 2 given map-2-to-map-1 transform R(90 q) p + shift."""
    truth = RigidTransform2D(quarter * math.pi / 2, shift)
    poses2 = truth.inverse().apply(np.array(poses1, float))
    return truth, tagset(poses1, np.rint(poses2))


class TestSolutions:
    def test_identity(self):
        poses = [(10, 10), (40, 12), (25, 50)]
        tags = tagset(poses, poses)
        sol = ogm_solution(0.0, tags)
        assert sol.kappa == 0 and sol.delta_theta_hat == 0.0
        assert sol.anchor_src == sol.anchor_dst
        assert np.array_equal(sol.transform().apply(np.array(poses, float)), np.array(poses, float))
        base = baseline_rfid_only(tags)
        assert base.rotation_deg == 0.0
        assert np.allclose(base.transform().apply(np.array(poses, float)), poses)

    def test_anchor_maps_exactly(self):
        tags = tagset([(10, 10), (40, 12), (25, 50)], [(3, 7), (9, 1), (20, 20)])
        sol = pre_icp_transform(13.7, 2, tags)
        assert sol.delta_theta_hat == pytest.approx(193.7)
        assert np.allclose(sol.transform().apply(np.array(sol.anchor_src)), sol.anchor_dst, atol=1e-12)

    def test_baseline_recovers_noiseless_transform(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            truth = RigidTransform2D(rng.uniform(-math.pi, math.pi), rng.uniform(-100, 100, 2))
            poses1 = rng.uniform(0, 200, (3, 2))
            poses2 = truth.inverse().apply(poses1)
            sol = baseline_rfid_only(tagset(poses1, poses2))
            assert abs(math.remainder(sol.rotation_deg - truth.degrees, 360.0)) < 1e-9
            pts = rng.uniform(-50, 250, (20, 2))
            assert np.allclose(sol.transform().apply(pts), truth.apply(pts), atol=1e-9)

    @pytest.mark.parametrize("quarter", [0, 1, 2, 3])
    def test_baseline_and_ogm_agree_on_quarter_turns(self, quarter):
        truth, tags = exact_pair(quarter, (300.0, -40.0), [(100, 100), (160, 104), (130, 170)])
        pts = np.random.default_rng(quarter).uniform(0, 200, (30, 2))
        base = baseline_rfid_only(tags)
        ogm = ogm_solution(0.0, tags)
        assert ogm.kappa == quarter
        assert np.allclose(base.transform().apply(pts), ogm.transform().apply(pts), atol=1e-9)
        assert np.allclose(ogm.transform().apply(pts), truth.apply(pts), atol=1e-9)

    def test_ogm_solution_resolves_quadrant(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            true_deg = rng.uniform(-180, 180)
            truth = RigidTransform2D(math.radians(true_deg), rng.uniform(-50, 50, 2))
            poses1 = np.array([[100, 100], [150, 100], [125, 160]], float) + rng.uniform(-5, 5, (3, 2))
            tags = tagset(poses1, truth.inverse().apply(poses1))
            delta_ogm = math.remainder(true_deg, 90.0) + rng.normal(0, 0.3)
            sol = ogm_solution(delta_ogm, tags)
            assert abs(math.remainder(sol.rotation_deg - true_deg, 360.0)) < 1.5

    def test_validation(self):
        with pytest.raises(ValueError):
            MergeSolution("bogus", 0.0, (0, 0), (0, 0))
        with pytest.raises(ValueError):
            MergeSolution("ogm_vector", 0.0, (0, 0), (0, 0), kappa=4)

    def test_json(self):
        sol = MergeSolution("icp_refined", 30.0, (1.0, 2.0), (3.0, 4.0), 0, 30.0, (0.5, -0.5, 0.2))
        rec = sol.to_json()
        assert rec["icp"] == {"dx": 0.5, "dy": -0.5, "dtheta_deg": 0.2}
        assert rec["rotation_deg"] == pytest.approx(30.2)


class TestClosedForm:
    def test_zero_correction_equals_stage_two(self):
        sol = MergeSolution("ogm_vector", 33.0, (5.0, 6.0), (50.0, 70.0), 0, 33.0)
        pts = np.random.default_rng(0).uniform(-100, 100, (50, 2))
        refined = MergeSolution("icp_refined", 33.0, (5.0, 6.0), (50.0, 70.0), 0, 33.0, (0.0, 0.0, 0.0))
        assert np.allclose(closed_form_transform(refined).apply(pts), sol.transform().apply(pts), atol=1e-12)

    def test_two_step_equals_closed_form(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(1000):
            sol = MergeSolution("icp_refined", rng.uniform(-180, 180), tuple(rng.uniform(0, 700, 2)),
                                tuple(rng.uniform(0, 700, 2)), icp=(*rng.uniform(-10, 10, 2), rng.uniform(-5, 5)))
            pts = rng.uniform(0, 700, (100, 2))
            worst = max(worst, np.abs(apply_two_step(pts, sol) - closed_form_transform(sol).apply(pts)).max())
        assert worst <= 1e-9
