"""Obstacle line segments from an occupancy grid.

The pipeline is RANSAC extraction over a sub-sample of the occupied cells,
breakdown of lines whose members span several walls, merging of near
duplicate segments, and a final length / reliability filter.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateGeometryError
from .grid import floor_cells


@dataclass(frozen=True)
class RansacParams:
    d_line: float = 2.0  # cells
    t_perc: float = 0.15
    t_final: float = 0.50
    max_iterations_per_line: int = 500
    subsample_stride: int = 2
    d_s: float = 30.0  # cells
    t_theta: float = 5.0  # degrees
    t_j: float = 5.0  # cells
    t_len: float = 30.0  # cells
    l_rel_min: float = 0.6
    seed: int = 0
    max_lines: int = 200

    def __post_init__(self):
        for name in ("d_line", "d_s", "t_theta", "t_j", "t_len"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("t_perc", "t_final", "l_rel_min"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.max_iterations_per_line < 1 or self.subsample_stride < 1:
            raise ValueError("iteration cap and stride must be >= 1")


def _canonical(points):
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    order = np.lexsort((points[:, 0], points[:, 1]))
    return points[order]


@dataclass(frozen=True, eq=False)
class LineSegment:
    """Segment between two member cells; ``members`` are its supporting cells."""

    p1: tuple
    p2: tuple
    members: np.ndarray = field(repr=False)
    reliability: float = float("nan")

    def __post_init__(self):
        members = _canonical(self.members)
        members.setflags(write=False)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "p1", (float(self.p1[0]), float(self.p1[1])))
        object.__setattr__(self, "p2", (float(self.p2[0]), float(self.p2[1])))

    @property
    def gradient(self):
        """Direction from ``p1`` to ``p2`` in degrees, in (-180, 180]."""
        deg = math.degrees(math.atan2(self.p2[1] - self.p1[1], self.p2[0] - self.p1[0]))
        return 180.0 if deg == -180.0 else deg

    @property
    def length(self):
        return math.hypot(self.p2[0] - self.p1[0], self.p2[1] - self.p1[1])

    def to_json(self):
        return {"x1": self.p1[0], "y1": self.p1[1], "x2": self.p2[0], "y2": self.p2[1],
                "theta_deg": self.gradient, "length": self.length,
                "reliability": None if math.isnan(self.reliability) else self.reliability,
                "n_members": int(len(self.members))}


def point_line_distance(a, b, c):
    """Distance of point(s) ``a`` from the infinite line through ``b`` and ``c``."""
    a = np.asarray(a, dtype=float)
    bx, by = float(b[0]), float(b[1])
    cx, cy = float(c[0]), float(c[1])
    norm = math.hypot(cx - bx, cy - by)
    if norm == 0.0:
        raise DegenerateGeometryError(f"line endpoints coincide at {(bx, by)}")
    return np.abs((cx - bx) * (by - a[..., 1]) - (bx - a[..., 0]) * (cy - by)) / norm


def point_segment_distance(a, b, c):
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    d = c - b
    denom = float(d @ d)
    if denom == 0.0:
        return np.linalg.norm(a - b, axis=-1)
    t = np.clip(((a - b) @ d) / denom, 0.0, 1.0)
    return np.linalg.norm(a - (b + t[..., None] * d), axis=-1)


def fit_direction(points):
    """Centroid and unit direction of the total-least-squares line through ``points``."""
    center = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - center, full_matrices=False)
    return center, vt[0]


def end_members(points, core_band=0.75):
    """Indices of the two endpoint members of a line-like point set.

    The ends are the extreme members along the fitted direction, taken from
    the members within ``core_band`` cells of the fitted line.  Cells of a
    neighbouring wall caught near a corner sit further out, so they can not
    tilt or shift the segment.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        raise DegenerateGeometryError("need at least two points")
    center, direction = fit_direction(pts)
    proj = (pts - center) @ direction
    resid = np.abs((pts - center) @ np.array([-direction[1], direction[0]]))
    core = np.flatnonzero(resid <= core_band)
    if len(core) < 2:
        core = np.arange(len(pts))
    i = core[np.lexsort((resid[core], proj[core]))[0]]
    j = core[np.lexsort((resid[core], -proj[core]))[0]]
    i, j = int(i), int(j)
    return (i, j) if i < j else (j, i)


def _segment_from(members, d_line):
    """Fit endpoints to ``members`` and drop members off the fitted line."""
    members = _canonical(members)
    if len(members) < 2:
        return None
    i, j = end_members(members)
    p1, p2 = members[i], members[j]
    if np.array_equal(p1, p2):
        return None
    keep = point_line_distance(members, p1, p2) <= d_line
    return LineSegment(tuple(p1), tuple(p2), members[keep])


def refit_inliers(points, inliers, d_line, rounds=5):
    """Re-collect inliers around the total-least-squares line of the current ones until stable.

    A sample pair that crosses a wall at a shallow angle only catches part
    of it; the fitted line runs along the wall and catches the rest.
    """
    for _ in range(rounds):
        members = points[inliers]
        if len(members) < 2:
            break
        center, direction = fit_direction(members)
        normal = np.array([-direction[1], direction[0]])
        updated = np.abs((points - center) @ normal) <= d_line
        if np.array_equal(updated, inliers) or updated.sum() < 2:
            break
        inliers = updated
    return inliers


def subsample(points, stride, rng):
    """Every ``stride``-th point of a random ordering, returned in row-major order.

    A plain stride over the row-major list aliases with thin walls: on a
    one-cell outline it can keep the whole left wall and none of the right.
    """
    if stride <= 1:
        return points
    keep = np.sort(rng.permutation(len(points))[::stride])
    return points[keep]


def ransac_extract(grid, params=RansacParams()):
    """Extract line segments from the occupied cells of ``grid``.

    Each round draws up to ``max_iterations_per_line`` point pairs; the first
    whose inliers exceed ``t_perc`` of the initial set is accepted, otherwise
    the best pair seen is kept.  The inliers are refitted with
    :func:`refit_inliers`, then the accepted line's endpoints become its two
    furthest members, membership is recomputed against that line and the
    members leave the point set.  Rounds stop once fewer than ``t_final`` of
    the points remain.
    """
    rng = np.random.default_rng(params.seed)
    points = subsample(grid.occupied_points(), params.subsample_stride, rng)
    n_init = len(points)
    if n_init < 2:
        return []
    lines = []
    chunk = 100
    while len(points) >= 2 and len(points) / n_init >= params.t_final and len(lines) < params.max_lines:
        n = len(points)
        first = rng.integers(0, n, size=params.max_iterations_per_line)
        second = rng.integers(0, n - 1, size=params.max_iterations_per_line)
        second = second + (second >= first)
        best_count, best_pair = -1, None
        for start in range(0, params.max_iterations_per_line, chunk):
            b = points[first[start:start + chunk]]
            c = points[second[start:start + chunk]]
            d = c - b
            norm = np.hypot(d[:, 0], d[:, 1])
            cross = np.abs(d[:, None, 0] * (b[:, None, 1] - points[None, :, 1])
                           - (b[:, None, 0] - points[None, :, 0]) * d[:, None, 1])
            counts = np.count_nonzero(cross <= params.d_line * norm[:, None], axis=1)
            accepted = np.flatnonzero(counts / n_init > params.t_perc)
            if accepted.size:
                k = accepted[0]
                best_pair = (b[k], c[k])
                break
            k = int(np.argmax(counts))
            if counts[k] > best_count:
                best_count, best_pair = counts[k], (b[k], c[k])
        inliers = refit_inliers(points, point_line_distance(points, *best_pair) <= params.d_line, params.d_line)
        seg = _segment_from(points[inliers], params.d_line)
        if seg is None:
            break
        support = point_line_distance(points, seg.p1, seg.p2) <= params.d_line
        seg = _segment_from(points[support], params.d_line)
        if seg is None:
            break
        member_set = {tuple(p) for p in seg.members}
        remaining = np.array([tuple(p) not in member_set for p in points])
        points = points[remaining]
        lines.append(seg)
    return lines


def breakdown_lines(lines, params=RansacParams()):
    """Split lines wherever consecutive members (sorted by distance from ``p1``) gap more than ``d_s``."""
    out = []
    for line in lines:
        dist = np.linalg.norm(line.members - np.asarray(line.p1), axis=1)
        order = np.argsort(dist, kind="stable")
        gaps = np.flatnonzero(np.diff(dist[order]) > params.d_s)
        if gaps.size == 0:
            out.append(line)
            continue
        for part in np.split(order, gaps + 1):
            seg = _segment_from(line.members[part], params.d_line)
            if seg is not None:
                out.append(seg)
    return out


def angle_difference(a, b, period=180.0):
    """Smallest absolute difference of two angles (degrees) modulo ``period``."""
    d = (a - b) % period
    return min(d, period - d)


def _mergeable(a, b, params):
    if angle_difference(a.gradient, b.gradient) >= params.t_theta:
        return False
    gap = min(point_segment_distance(np.array([b.p1, b.p2]), a.p1, a.p2).min(),
              point_segment_distance(np.array([a.p1, a.p2]), b.p1, b.p2).min())
    return gap < params.t_j


def merge_lines(lines, params=RansacParams()):
    """Merge aligned segments whose nearest endpoints are within ``t_j``; repeat to a fixpoint."""
    lines = list(lines)
    changed = True
    while changed:
        changed = False
        for i in range(len(lines)):
            for j in range(i + 1, len(lines)):
                if _mergeable(lines[i], lines[j], params):
                    union = np.unique(np.vstack([lines[i].members, lines[j].members]), axis=0)
                    merged = _segment_from(union, params.d_line)
                    lines[i] = merged
                    del lines[j]
                    changed = True
                    break
            if changed:
                break
    return lines


def segment_cells(p1, p2):
    """Cells visited by the segment, sampled every half cell and floor-rounded."""
    p1, p2 = np.asarray(p1, float), np.asarray(p2, float)
    n = max(int(math.ceil(2 * np.linalg.norm(p2 - p1))), 1) + 1
    t = np.linspace(0.0, 1.0, n)[:, None]
    cells = floor_cells(p1 + t * (p2 - p1))
    _, idx = np.unique(cells, axis=0, return_index=True)
    return cells[np.sort(idx)]


def line_reliability(grid, line):
    """Mean occupancy of the cells under the segment; unexplored or off-map cells count as 0."""
    cells = segment_cells(line.p1, line.p2)
    inside = (cells[:, 0] >= 0) & (cells[:, 0] < grid.width) & (cells[:, 1] >= 0) & (cells[:, 1] < grid.height)
    values = np.zeros(len(cells))
    values[inside] = np.nan_to_num(grid.cells[cells[inside, 1], cells[inside, 0]], nan=0.0)
    return float(values.mean())


def filter_lines(grid, lines, params=RansacParams()):
    """Keep lines longer than ``t_len`` with reliability at least ``l_rel_min``."""
    kept = []
    for line in lines:
        line = replace(line, reliability=line_reliability(grid, line))
        if line.length > params.t_len and line.reliability >= params.l_rel_min:
            kept.append(line)
    return kept


def extract_lines(grid, params=RansacParams()):
    """RANSAC, breakdown, merge and filter in one call."""
    lines = ransac_extract(grid, params)
    lines = breakdown_lines(lines, params)
    lines = merge_lines(lines, params)
    return filter_lines(grid, lines, params)


def lines_to_json(lines):
    return json.dumps([line.to_json() for line in lines], indent=2)
