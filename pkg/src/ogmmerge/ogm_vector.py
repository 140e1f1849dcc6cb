"""OGM direction vector: one angle summarising a rectilinear map's wall layout.

Segments are split into two perpendicular groups relative to the first
segment, with +-180 degree rewrites so that every member of a group points
into the same quadrant.  Each group's direction is a length- and
reliability-weighted mean; the OGM vector is the mean of the two directions,
reported modulo 90 degrees in [-90, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

WEIGHT_MODES = ("reliability", "complement")


@dataclass(frozen=True)
class GroupedLine:
    index: int
    gradient: float  # rewritten, degrees
    original: float
    length: float = 1.0
    reliability: float = 1.0


@dataclass(frozen=True)
class LineGroups:
    reference: float
    g1: tuple
    g2: tuple


@dataclass(frozen=True)
class OgmVector:
    theta: float  # degrees, [-90, 0)
    mean1: float
    mean2: float | None
    weight1: float
    weight2: float
    n1: int
    n2: int

    def to_json(self):
        return {"theta_ogm_deg": self.theta, "group1_mean_deg": self.mean1, "group2_mean_deg": self.mean2,
                "group1_weight": self.weight1, "group2_weight": self.weight2,
                "group1_count": self.n1, "group2_count": self.n2}


def wrap180(deg):
    """Wrap degrees into (-180, 180]."""
    w = math.remainder(deg, 360.0)
    return 180.0 if w == -180.0 else w


def canonical_ogm(deg):
    """Representative of ``deg`` modulo 90 in [-90, 0)."""
    return (deg % 90.0) - 90.0


def _describe(item):
    if hasattr(item, "gradient"):
        rel = getattr(item, "reliability", 1.0)
        return float(item.gradient), float(item.length), 1.0 if math.isnan(rel) else float(rel)
    return float(item), 1.0, 1.0


def classify_groups(lines):
    """Split segments (or bare gradients in degrees) into two perpendicular groups.

    A line whose gradient is within 45 degrees of the first line's, or within
    45 degrees of its reverse, joins G1 and is rewritten into the first line's
    quadrant.  All others join G2 and are rewritten into
    [theta_1 + 45, theta_1 + 135].  Boundary ties go to G1.
    """
    items = [_describe(item) for item in lines]
    if not items:
        raise ValueError("classify_groups needs at least one line")
    ref = items[0][0]
    g1, g2 = [], []
    for index, (theta, length, rel) in enumerate(items):
        d = wrap180(theta - ref)
        if abs(d) <= 45.0:
            g1.append(GroupedLine(index, ref + d, theta, length, rel))
        elif abs(d) >= 135.0:
            g1.append(GroupedLine(index, ref + d - math.copysign(180.0, d), theta, length, rel))
        elif d > 0:
            g2.append(GroupedLine(index, ref + d, theta, length, rel))
        else:
            g2.append(GroupedLine(index, ref + d + 180.0, theta, length, rel))
    return LineGroups(ref, tuple(g1), tuple(g2))


def _weighted_mean(group, mode):
    if mode == "reliability":
        weights = [g.length * g.reliability for g in group]
    elif mode == "complement":
        weights = [g.length * (1.0 - g.reliability) for g in group]
    else:
        raise ValueError(f"unknown weighting {mode!r}; expected one of {WEIGHT_MODES}")
    total = sum(weights)
    if total <= 0.0:
        raise ValueError("total line weight is zero")
    return sum(g.gradient * w for g, w in zip(group, weights)) / total, total


def ogm_vector(groups, weighting="reliability"):
    """Weighted group directions and their mean.

    ``weighting="reliability"`` weighs a line by ``length * L_rel``;
    ``"complement"`` uses ``length * (1 - L_rel)``.  Without a second group
    the vector is the first group's direction minus 45 degrees.
    """
    if not groups.g1 and not groups.g2:
        raise ValueError("both line groups are empty")
    if not groups.g1:
        mean2, w2 = _weighted_mean(groups.g2, weighting)
        return OgmVector(canonical_ogm(mean2 - 45.0), None, mean2, 0.0, w2, 0, len(groups.g2))
    mean1, w1 = _weighted_mean(groups.g1, weighting)
    if not groups.g2:
        return OgmVector(canonical_ogm(mean1 - 45.0), mean1, None, w1, 0.0, len(groups.g1), 0)
    mean2, w2 = _weighted_mean(groups.g2, weighting)
    return OgmVector(canonical_ogm((mean1 + mean2) / 2.0), mean1, mean2, w1, w2,
                     len(groups.g1), len(groups.g2))


def relative_rotation(v1, v2):
    """``theta_OGM1 - theta_OGM2`` reduced into (-45, 45].

    The true rotation is this value plus a multiple of 90 degrees.
    """
    d = (v1.theta - v2.theta) % 90.0
    return d - 90.0 if d > 45.0 else d
