import math

import numpy as np
import pytest

from helpers import grid_from, rectangle_outline
from ogmmerge.errors import DegenerateGeometryError
from ogmmerge.lines import (
    LineSegment,
    RansacParams,
    angle_difference,
    breakdown_lines,
    end_members,
    extract_lines,
    filter_lines,
    merge_lines,
    point_line_distance,
    ransac_extract,
    refit_inliers,
    subsample,
)
from ogmmerge.lines import _mergeable


def horizontal(x0, x1, y=10.0):
    xs = np.arange(x0, x1 + 1, dtype=float)
    members = np.column_stack([xs, np.full_like(xs, y)])
    return LineSegment(tuple(members[0]), tuple(members[-1]), members)


def projection_distance(a, b, c):
    """Independent oracle: distance to the orthogonal projection onto line bc."""
    a, b, c = (np.asarray(v, float) for v in (a, b, c))
    d = c - b
    foot = b + d * ((a - b) @ d) / (d @ d)
    return float(np.linalg.norm(a - foot))


class TestPointLineDistance:
    def test_point_on_line(self):
        assert point_line_distance((0, 0.5), (0, 1), (0, -1)) == 0.0

    def test_unit_offset(self):
        assert point_line_distance((1, 0), (0, 1), (0, -1)) == 1.0

    def test_diagonal(self):
        assert point_line_distance((3, 4), (0, 0), (1, 1)) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
        assert projection_distance((3, 4), (0, 0), (1, 1)) == pytest.approx(0.70711, abs=1e-5)

    def test_matches_projection_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a, b, c = rng.uniform(-50, 50, (3, 2))
            assert point_line_distance(a, b, c) == pytest.approx(projection_distance(a, b, c), abs=1e-9)

    def test_degenerate_line(self):
        with pytest.raises(DegenerateGeometryError):
            point_line_distance((1, 1), (2, 2), (2, 2))


class TestRansac:
    def test_empty_map(self):
        assert ransac_extract(grid_from(np.zeros((20, 20)))) == []
        assert extract_lines(grid_from(np.full((20, 20), np.nan))) == []

    def test_rectangle_outline_exhaustive(self):
        # Exhaustive settings: every occupied cell, stop only when 5% are left.
        corners = np.array([[30, 30], [230, 30], [230, 180], [30, 180]], float)
        for seed in range(5):
            lines = extract_lines(rectangle_outline(), RansacParams(seed=seed, t_final=0.05, subsample_stride=1))
            assert len(lines) == 4
            assert sorted(round(abs(line.gradient) % 180) for line in lines) == [0, 0, 90, 90]
            for line in lines:
                g = line.gradient % 90.0
                assert min(g, 90.0 - g) <= 1.0
                for p in (line.p1, line.p2):
                    assert np.linalg.norm(corners - np.array(p), axis=1).min() <= 3.0

    def test_rectangle_outline_default_subset(self, outline):
        # Defaults stop once half of the sub-sampled cells are explained.
        for seed in range(5):
            lines = extract_lines(outline, RansacParams(seed=seed))
            assert 1 <= len(lines) <= 4
            for line in lines:
                g = line.gradient % 90.0
                assert min(g, 90.0 - g) <= 1.0
                assert line.reliability == 1.0

    def test_subsample_keeps_both_thin_walls(self, outline):
        params = RansacParams()
        pts = subsample(outline.occupied_points(), params.subsample_stride, np.random.default_rng(0))
        assert len(pts) == (len(outline.occupied_points()) + 1) // 2
        assert (pts[:, 0] == 30).sum() > 20 and (pts[:, 0] == 230).sum() > 20

    def test_endpoints_ignore_corner_cells(self):
        wall = np.column_stack([np.full(50, 40.0), np.arange(10, 60, dtype=float)])
        corner = np.array([[38.0, 10.0], [39.0, 10.0], [38.0, 59.0]])
        pts = np.vstack([wall, corner])
        i, j = end_members(pts)
        assert {tuple(pts[i]), tuple(pts[j])} == {(40.0, 10.0), (40.0, 59.0)}

    def test_refit_catches_whole_wall(self):
        xs = np.arange(0, 200, dtype=float)
        pts = np.column_stack([xs, np.full_like(xs, 5.0)])
        slanted = point_line_distance(pts, (0, 3.5), (200, 7.5)) <= 2.0
        assert slanted.sum() < len(pts)
        assert refit_inliers(pts, slanted, 2.0).all()

    def test_deterministic(self, outline):
        a = ransac_extract(outline, RansacParams(seed=7))
        b = ransac_extract(outline, RansacParams(seed=7))
        assert [(x.p1, x.p2) for x in a] == [(y.p1, y.p2) for y in b]

    def test_members_within_d_line(self, outline):
        params = RansacParams(seed=3)
        for line in ransac_extract(outline, params):
            assert np.all(point_line_distance(line.members, line.p1, line.p2) <= params.d_line)
            assert line.length == pytest.approx(math.dist(line.p1, line.p2))

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            RansacParams(t_perc=1.5)
        with pytest.raises(ValueError):
            RansacParams(d_line=0)


class TestBreakdown:
    def test_doorway_splits_line(self):
        members = np.vstack([horizontal(0, 100).members, horizontal(141, 240).members])
        line = LineSegment((0, 10), (240, 10), members)
        parts = breakdown_lines([line], RansacParams(d_s=30))
        assert len(parts) == 2
        assert sorted(p.length for p in parts) == [99.0, 100.0]

    def test_contiguous_line_unchanged(self):
        members = horizontal(0, 100).members[::2]
        line = LineSegment((0, 10), (100, 10), members)
        assert breakdown_lines([line]) == [line]

    def test_three_clusters(self):
        parts = [horizontal(0, 40), horizontal(76, 116), horizontal(152, 192)]
        line = LineSegment((0, 10), (192, 10), np.vstack([p.members for p in parts]))
        out = breakdown_lines([line])
        assert len(out) == 3
        assert breakdown_lines(out) == out

    def test_no_gap_larger_than_d_s_after_breakdown(self, outline):
        params = RansacParams(seed=1)
        lines = breakdown_lines(ransac_extract(outline, params), params)
        again = breakdown_lines(lines, params)
        assert len(again) == len(lines)


class TestMerge:
    def test_near_identical_segments_merge(self):
        a = horizontal(0, 80)
        angle = math.radians(1.0)
        pts = np.array([[x, 10 + x * math.tan(angle)] for x in range(0, 81)])
        b = LineSegment(tuple(pts[0]), tuple(pts[-1]), pts)
        assert angle_difference(a.gradient, b.gradient) == pytest.approx(1.0)
        out = merge_lines([a, b])
        assert len(out) == 1

    def test_perpendicular_corner_untouched(self):
        a = horizontal(0, 50)
        ys = np.arange(10, 61, dtype=float)
        b = LineSegment((0, 10), (0, 60), np.column_stack([np.zeros_like(ys), ys]))
        assert len(merge_lines([a, b])) == 2

    def test_chain_merges_to_one(self):
        parts = [horizontal(0, 40), horizontal(42, 80), horizontal(82, 120)]
        out = merge_lines(parts)
        assert len(out) == 1
        assert len(out[0].members) == sum(len(p.members) for p in parts)
        assert out[0].length == 120.0

    def test_fixpoint_has_no_mergeable_pair(self, outline):
        params = RansacParams(seed=2)
        lines = merge_lines(breakdown_lines(ransac_extract(outline, params), params), params)
        for i in range(len(lines)):
            for j in range(i + 1, len(lines)):
                assert not _mergeable(lines[i], lines[j], params)

    def test_angles_compared_modulo_180(self):
        assert angle_difference(89.0, -91.0) == pytest.approx(0.0)
        assert angle_difference(179.0, -179.0) == pytest.approx(2.0)


class TestFilter:
    def _grid(self):
        cells = np.zeros((30, 120))
        cells[10, 0:51] = 1.0
        cells[20, 0:26] = 1.0
        return grid_from(cells)

    def test_short_fragment_removed(self):
        assert filter_lines(self._grid(), [horizontal(0, 10)]) == []

    def test_occupied_line_kept(self):
        (kept,) = filter_lines(self._grid(), [horizontal(0, 50)])
        assert kept.reliability == 1.0

    def test_half_free_line_removed(self):
        line = horizontal(0, 50, y=20.0)
        cells = self._grid().cells
        expected = cells[20, 0:51].mean()
        assert expected == pytest.approx(0.5, abs=0.02)
        assert filter_lines(self._grid(), [line]) == []

    def test_surviving_lines_satisfy_thresholds(self, outline):
        params = RansacParams(seed=4)
        for line in extract_lines(outline, params):
            assert line.length > params.t_len
            assert line.reliability >= params.l_rel_min
            assert np.all(outline.occupied[line.members[:, 1].astype(int), line.members[:, 0].astype(int)])

    def test_json_record(self):
        rec = horizontal(0, 50).to_json()
        assert set(rec) == {"x1", "y1", "x2", "y2", "theta_deg", "length", "reliability", "n_members"}
        assert rec["n_members"] == 51 and rec["reliability"] is None
