"""Map alignment error."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree


def chamfer_mse(points, reference):
    """Mean squared distance from each of ``points`` to its nearest ``reference`` point (cells^2)."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    reference = np.asarray(reference, dtype=float).reshape(-1, 2)
    if len(points) == 0 or len(reference) == 0:
        raise ValueError("chamfer_mse needs two non-empty point sets")
    dist, _ = cKDTree(reference).query(points)
    return float(np.mean(dist ** 2))


def mse(map_a, map_b):
    """One-sided Chamfer error of ``map_b``'s occupied cells against ``map_a``'s, in px^2.

    Both grids must share a frame (same origin and resolution).
    """
    if map_a.resolution != map_b.resolution:
        raise ValueError("maps have different resolutions")
    shift = (np.asarray(map_b.origin) - np.asarray(map_a.origin)) / map_a.resolution
    return chamfer_mse(map_b.occupied_points() + shift, map_a.occupied_points())
