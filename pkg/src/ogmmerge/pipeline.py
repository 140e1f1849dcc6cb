"""Rotation and translation between two robots' maps from common RFID tags.

Map 2 is carried into map 1's frame.  Tag pairs are gated on localization
probability and sorted so that pair 1 is the best localized; its two poses
anchor the translation.  The OGM vectors fix the rotation modulo 90 degrees
and the three tags' layout picks the quadrant ``kappa``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError
from .grid import RigidTransform2D, rotation_matrix
from .rfid import ANCHOR_PROBABILITY, MIN_PROBABILITY

STAGES = ("rfid_only", "ogm_vector", "icp_refined")


@dataclass(frozen=True)
class CommonTagSet:
    """Three tag pairs ``(estimate in map 1, estimate in map 2)``, best localized first."""

    pairs: tuple

    def poses(self, map_index):
        """``(3, 2)`` array of the tag cells in map ``map_index`` (1 or 2)."""
        if map_index not in (1, 2):
            raise ValueError("map_index must be 1 or 2")
        return np.array([pair[map_index - 1].map_pose for pair in self.pairs], dtype=float)

    def min_probability(self, j):
        a, b = self.pairs[j]
        return min(a.probability, b.probability)

    @property
    def tag_ids(self):
        return tuple(a.tag_id for a, _ in self.pairs)


def _as_map(tags):
    if isinstance(tags, dict):
        return tags
    return {t.tag_id: t for t in tags}


def gate_and_sort(tags_robot1, tags_robot2, min_probability=MIN_PROBABILITY,
                  anchor_probability=ANCHOR_PROBABILITY):
    """Common tags ready for merging, or ``None`` when the gate is not met.

    Both estimates of a pair must reach ``min_probability`` and the best
    pair's weaker estimate must reach ``anchor_probability``.  Pairs are
    ordered by their weaker probability, descending, ties by tag id.
    """
    m1, m2 = _as_map(tags_robot1), _as_map(tags_robot2)
    candidates = []
    for tag_id in set(m1) & set(m2):
        a, b = m1[tag_id], m2[tag_id]
        low = min(a.probability, b.probability)
        if low >= min_probability:
            candidates.append((-low, tag_id, a, b))
    if len(candidates) < 3:
        return None
    candidates.sort(key=lambda c: (c[0], c[1]))
    best = candidates[:3]
    if -best[0][0] < anchor_probability:
        return None
    return CommonTagSet(tuple((a, b) for _, _, a, b in best))


def quadrant_angle(tags, map_index):
    """Direction (degrees) from the midpoint of tags 1 and 2 to tag 3 in one map."""
    poses = tags.poses(map_index)
    center = (poses[0] + poses[1]) / 2.0
    dx, dy = poses[2] - center
    if math.hypot(dx, dy) < 1e-9:
        raise DegenerateGeometryError(f"third tag coincides with the midpoint of the others in map {map_index}")
    return math.degrees(math.atan2(dy, dx))


def kappa_band(angle):
    """Quadrant index for an angle (degrees) after normalizing into [-45, 315).

    Bands are (-45, 45], (45, 135], (135, 215], (215, 315); an exact band
    edge goes to the lower band and -45 itself to band 0.
    """
    a = (angle + 45.0) % 360.0 - 45.0
    if a <= 45.0:
        return 0
    if a <= 135.0:
        return 1
    if a <= 215.0:
        return 2
    return 3


def select_kappa(theta3_map1, theta3_map2):
    return kappa_band(theta3_map1 - theta3_map2)


@dataclass(frozen=True)
class MergeSolution:
    """Transform from map-2 cells to map-1 cells.

    ``rfid_only`` and ``ogm_vector`` map ``p -> R(delta_theta_hat) (p -
    anchor_src) + anchor_dst``.  ``icp_refined`` inserts the ICP correction
    between rotation and placement: ``R(dtheta_icp) (R(delta_theta_hat) (p -
    anchor_src) + (dx_icp, dy_icp)) + anchor_dst``.
    """

    stage: str
    delta_theta_hat: float  # degrees
    anchor_src: tuple
    anchor_dst: tuple
    kappa: int | None = None
    delta_theta_ogm: float | None = None
    icp: tuple | None = None  # (dx_icp, dy_icp, dtheta_icp_deg)

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")
        if self.kappa is not None and self.kappa not in (0, 1, 2, 3):
            raise ValueError("kappa must be in 0..3")

    @property
    def rotation_deg(self):
        total = self.delta_theta_hat + (self.icp[2] if self.icp else 0.0)
        return math.degrees(RigidTransform2D(math.radians(total)).theta)

    def transform(self):
        if self.icp is None:
            return RigidTransform2D.about(math.radians(self.delta_theta_hat), self.anchor_src, self.anchor_dst)
        return closed_form_transform(self)

    def to_json(self):
        t = self.transform()
        return {"stage": self.stage, "delta_theta_hat_deg": self.delta_theta_hat, "kappa": self.kappa,
                "delta_theta_ogm_deg": self.delta_theta_ogm,
                "anchor_src": list(map(float, self.anchor_src)), "anchor_dst": list(map(float, self.anchor_dst)),
                "icp": None if self.icp is None else {"dx": self.icp[0], "dy": self.icp[1], "dtheta_deg": self.icp[2]},
                "rotation_deg": t.degrees, "translation": list(t.t)}


def closed_form_transform(solution):
    """Single rotation plus constant offset equivalent to the ICP-refined two-step map."""
    dx, dy, dtheta = solution.icp if solution.icp else (0.0, 0.0, 0.0)
    total = math.radians(solution.delta_theta_hat + dtheta)
    rot_total = rotation_matrix(total)
    rot_icp = rotation_matrix(math.radians(dtheta))
    const = (-rot_total @ np.asarray(solution.anchor_src, float)
             + rot_icp @ np.array([dx, dy]) + np.asarray(solution.anchor_dst, float))
    return RigidTransform2D(total, tuple(const))


def apply_two_step(points, solution):
    """Apply the solution step by step: shift to anchor, rotate, ICP shift, ICP rotate, place."""
    pts = np.asarray(points, dtype=float)
    dx, dy, dtheta = solution.icp if solution.icp else (0.0, 0.0, 0.0)
    rot = rotation_matrix(math.radians(solution.delta_theta_hat))
    inter = (pts - np.asarray(solution.anchor_src, float)) @ rot.T + np.array([dx, dy])
    rot_icp = rotation_matrix(math.radians(dtheta))
    return inter @ rot_icp.T + np.asarray(solution.anchor_dst, float)


def pre_icp_transform(delta_theta_ogm, kappa, tags):
    """OGM-vector rotation corrected by ``kappa`` quarter turns, anchored on tag pair 1."""
    p1, p2 = tags.pairs[0]
    return MergeSolution("ogm_vector", delta_theta_ogm + 90.0 * kappa, tuple(map(float, p2.map_pose)),
                         tuple(map(float, p1.map_pose)), kappa=kappa, delta_theta_ogm=delta_theta_ogm)


def ogm_solution(delta_theta_ogm, tags):
    """Pick ``kappa`` for an OGM-vector rotation and build the pre-ICP solution.

    The tag direction difference is compared with the OGM rotation: the band
    lookup runs on what is left after removing ``delta_theta_ogm``, which is
    close to a multiple of 90 degrees whatever the true rotation.
    """
    theta1 = quadrant_angle(tags, 1)
    theta2 = quadrant_angle(tags, 2)
    kappa = select_kappa(theta1, theta2 + delta_theta_ogm)
    return pre_icp_transform(delta_theta_ogm, kappa, tags)


def baseline_rfid_only(tags):
    """Transform from the tags alone: rotation from the tag layout, translation between triplet centroids."""
    rotation = quadrant_angle(tags, 1) - quadrant_angle(tags, 2)
    c1 = tags.poses(1).mean(axis=0)
    c2 = tags.poses(2).mean(axis=0)
    rotation = math.degrees(RigidTransform2D(math.radians(rotation)).theta)
    return MergeSolution("rfid_only", rotation, tuple(c2), tuple(c1))
