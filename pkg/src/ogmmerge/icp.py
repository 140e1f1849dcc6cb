"""Point-to-point ICP between the overlapping occupied cells of two pre-aligned maps.

ICP runs in the intermediate frame where map 2's walls have been shifted to
its anchor tag and rotated, and map 1's walls shifted to its own anchor tag.
The result ``(dx, dy, dtheta)`` acts there as ``q -> R(dtheta) (q + (dx, dy))``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .errors import CorrespondenceError, NoOverlapError
from .grid import RigidTransform2D, rotation_matrix

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IcpParams:
    max_iterations: int = 100
    convergence_eps: float = 1e-3  # change of mean correspondence distance, cells
    max_correspondence_distance: float = 10.0  # cells
    fine_correspondence_distance: float | None = 3.0  # cells; cap for a second pass, None to skip
    overlap_margin: float = 5.0  # cells
    correspondence: str = "wall"  # "wall" or "cell"

    def __post_init__(self):
        if self.max_iterations < 1 or not (self.convergence_eps > 0 and self.max_correspondence_distance > 0
                                           and self.overlap_margin >= 0):
            raise ValueError("ICP parameters must be positive")
        if self.fine_correspondence_distance is not None and not self.fine_correspondence_distance > 0:
            raise ValueError("ICP parameters must be positive")
        if self.correspondence not in ("wall", "cell"):
            raise ValueError("correspondence must be 'wall' or 'cell'")


@dataclass(frozen=True)
class IcpResult:
    dx: float
    dy: float
    dtheta: float  # degrees
    iterations: int
    mse: float
    history: tuple = field(default=(), repr=False)

    @property
    def initial_mse(self):
        return self.history[0] if self.history else self.mse

    def to_json(self):
        return {"dx": self.dx, "dy": self.dy, "dtheta_deg": self.dtheta, "iterations": self.iterations,
                "mse": self.mse, "history": list(self.history)}


def select_overlap(set_a, set_b, margin=5.0):
    """Points of each set inside the intersection of both bounding boxes, grown by ``margin``."""
    a = np.asarray(set_a, dtype=float).reshape(-1, 2)
    b = np.asarray(set_b, dtype=float).reshape(-1, 2)
    if len(a) == 0 or len(b) == 0:
        raise NoOverlapError("empty point set")
    lo = np.maximum(a.min(axis=0), b.min(axis=0)) - margin
    hi = np.minimum(a.max(axis=0), b.max(axis=0)) + margin
    if np.any(lo > hi):
        raise NoOverlapError("bounding boxes do not intersect")

    def inside(p):
        return p[np.all((p >= lo) & (p <= hi), axis=1)]

    sub_a, sub_b = inside(a), inside(b)
    if len(sub_a) == 0 or len(sub_b) == 0:
        raise NoOverlapError("no points inside the common region")
    return sub_a, sub_b


def best_fit_transform(src, dst):
    """Least-squares rotation and translation taking ``src`` onto ``dst`` (paired rows)."""
    ms, md = src.mean(axis=0), dst.mean(axis=0)
    s, d = src - ms, dst - md
    theta = math.atan2(np.sum(s[:, 0] * d[:, 1] - s[:, 1] * d[:, 0]), np.sum(s[:, 0] * d[:, 0] + s[:, 1] * d[:, 1]))
    t = md - rotation_matrix(theta) @ ms
    return RigidTransform2D(theta, tuple(t))


class WallTarget:
    """Nearest-point lookup on a set of wall cells.

    ``cell`` mode returns the nearest cell centre.  ``wall`` mode returns the
    closest point on the links from that cell to its 8-connected neighbours,
    so matches are not snapped to the lattice and sub-cell residuals still
    pull the source along.
    """

    def __init__(self, points, mode="wall"):
        self.points = np.asarray(points, dtype=float).reshape(-1, 2)
        self.tree = cKDTree(self.points)
        self.mode = mode
        self.neighbours = np.full((len(self.points), 8), -1)
        if mode == "wall":
            pairs = self.tree.query_pairs(1.5, output_type="ndarray")
            both = np.vstack([pairs, pairs[:, ::-1]])
            both = both[np.lexsort((both[:, 1], both[:, 0]))]
            first = np.searchsorted(both[:, 0], both[:, 0])
            rank = np.arange(len(both)) - first
            keep = rank < 8
            self.neighbours[both[keep, 0], rank[keep]] = both[keep, 1]

    def query(self, query, cap):
        """``(distances, matched points)``; distance is inf where nothing lies within ``cap``."""
        dist, idx = self.tree.query(query, distance_upper_bound=cap)
        ok = np.isfinite(dist)
        match = np.zeros_like(query)
        match[ok] = self.points[idx[ok]]
        if self.mode == "cell":
            return dist, match
        q, c = query[ok], idx[ok]
        base = self.points[c]
        best, best_d2 = base.copy(), np.sum((q - base) ** 2, axis=1)
        for k in range(self.neighbours.shape[1]):
            n = self.neighbours[c, k]
            has = n >= 0
            if not has.any():
                break
            edge = self.points[n[has]] - base[has]
            t = np.clip(np.sum((q[has] - base[has]) * edge, axis=1) / np.sum(edge * edge, axis=1), 0.0, 1.0)
            p = base[has] + t[:, None] * edge
            d2 = np.sum((q[has] - p) ** 2, axis=1)
            better = d2 < best_d2[has]
            rows = np.flatnonzero(has)[better]
            best[rows], best_d2[rows] = p[better], d2[better]
        match[ok] = best
        dist = dist.copy()
        dist[ok] = np.sqrt(best_d2)
        return dist, match


def _truncated_mse(dist, cap):
    return float(np.mean(np.minimum(dist, cap) ** 2))


def correspondence_caps(params):
    """Distance caps of the coarse pass and, if set and smaller, the fine pass."""
    fine = params.fine_correspondence_distance
    cap = params.max_correspondence_distance
    return (cap,) if fine is None or fine >= cap else (cap, fine)


def icp(source, target, params=IcpParams()):
    """Align ``source`` onto ``target`` with nearest-point correspondences.

    A coarse pass matches within ``max_correspondence_distance``; once it
    converges a fine pass continues within ``fine_correspondence_distance``
    so that walls seen by only one map stop pulling on the result.
    Correspondences follow ``params.correspondence`` (see :class:`WallTarget`).
    The tracked error is the mean of squared match distances truncated at
    the current cap.  It never increases from one iteration to the next, and
    shrinking the cap can only lower it.
    """
    source = np.asarray(source, dtype=float).reshape(-1, 2)
    target = np.asarray(target, dtype=float).reshape(-1, 2)
    if len(source) == 0 or len(target) == 0:
        raise CorrespondenceError("empty point set")
    lookup = WallTarget(target, params.correspondence)
    current = source
    total = RigidTransform2D.identity()
    history = []
    steps = 0
    last = None
    for stage, cap in enumerate(correspondence_caps(params)):
        if last is not None and np.all(last[np.isfinite(last)] <= cap):
            break  # the fine cap would keep the same matches
        prev_mean = None
        while True:
            dist, match = lookup.query(current, cap)
            last = dist
            ok = np.isfinite(dist)
            if not ok.any():
                if stage == 0:
                    raise CorrespondenceError(f"no correspondences within {cap} cells")
                break
            history.append(_truncated_mse(np.where(ok, dist, cap), cap))
            mean_dist = float(dist[ok].mean())
            if steps >= params.max_iterations:
                break
            if prev_mean is not None and abs(prev_mean - mean_dist) < params.convergence_eps:
                break
            prev_mean = mean_dist
            step = best_fit_transform(current[ok], match[ok])
            current = step.apply(current)
            total = step.compose(total)
            steps += 1
            if step.theta == 0.0 and step.t == (0.0, 0.0):
                dist, _ = lookup.query(current, cap)
                last = dist
                history.append(_truncated_mse(np.where(np.isfinite(dist), dist, cap), cap))
                break
    shift = rotation_matrix(total.theta).T @ np.asarray(total.t)
    return IcpResult(float(shift[0]), float(shift[1]), total.degrees, steps, history[-1], tuple(history))


def overlap_error(source, target, params=IcpParams()):
    """Truncated mean-square match distance at the last cap of the schedule."""
    cap = correspondence_caps(params)[-1]
    dist, _ = WallTarget(target, params.correspondence).query(np.asarray(source, float).reshape(-1, 2), cap)
    return _truncated_mse(np.where(np.isfinite(dist), dist, cap), cap)


def intermediate_frames(solution, points_map1, points_map2):
    """Both wall sets in the frame ICP works in (see module docstring)."""
    rot = rotation_matrix(math.radians(solution.delta_theta_hat))
    src = (np.asarray(points_map2, float) - np.asarray(solution.anchor_src)) @ rot.T
    dst = np.asarray(points_map1, float) - np.asarray(solution.anchor_dst)
    return src, dst


def apply_icp(points, result):
    """``q -> R(dtheta) (q + (dx, dy))`` in the intermediate frame."""
    rot = rotation_matrix(math.radians(result.dtheta))
    return (np.asarray(points, float) + np.array([result.dx, result.dy])) @ rot.T


def compose_final(stage2, result):
    """Attach an ICP correction to a pre-ICP solution."""
    return replace(stage2, stage="icp_refined", icp=(result.dx, result.dy, result.dtheta))


def refine(stage2, points_map1, points_map2, params=IcpParams()):
    """Run overlap selection and ICP on top of ``stage2``.

    Returns ``(solution, icp_result)``.  When the overlap is empty, ICP finds
    no correspondences, or its final error is worse than the starting error,
    the stage-2 solution comes back unchanged with ``icp_result`` possibly None.
    """
    src, dst = intermediate_frames(stage2, points_map1, points_map2)
    try:
        sub_src, sub_dst = select_overlap(src, dst, params.overlap_margin)
        result = icp(sub_src, sub_dst, params)
    except (NoOverlapError, CorrespondenceError) as exc:
        log.warning("ICP skipped: %s", exc)
        return stage2, None
    before = overlap_error(sub_src, sub_dst, params)
    after = overlap_error(apply_icp(sub_src, result), sub_dst, params)
    if after > before:
        log.warning("ICP raised the overlap error (%.3f -> %.3f); keeping the pre-ICP transform", before, after)
        return stage2, result
    return compose_final(stage2, result), result
