"""Occupancy/coverage grids, 2-D rigid transforms and raster transformation.

Cell ``(col, row)`` is addressed as the point ``(x, y) = (col, row)`` in cell
units; ``cells[row, col]`` holds its value.  World coordinates in meters are
``origin + (col, row) * resolution`` and the inverse uses floor rounding via
:func:`floor_cells`, the one rounding rule used everywhere in the package.

Unexplored cells are stored as NaN.  NaN never compares equal to a number, so
"unexplored" can not be mistaken for 0.5 or any other occupancy value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

OCCUPIED_THRESHOLD = 0.5
# Absorbs float noise such as 2.9999999999999996 before flooring.
FLOOR_EPS = 1e-9


def floor_cells(points):
    """Floor float cell coordinates to integer cell indices."""
    return np.floor(np.asarray(points, dtype=float) + FLOOR_EPS).astype(np.int64)


def _frozen(array):
    array = np.array(array, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class _Grid:
    cells: np.ndarray
    resolution: float = 0.02
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        cells = _frozen(self.cells)
        if cells.ndim != 2 or cells.shape[0] == 0 or cells.shape[1] == 0:
            raise ValueError(f"grid must be a non-empty 2-D array, got shape {cells.shape}")
        if not self.resolution > 0:
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        explored = cells[~np.isnan(cells)]
        if explored.size and (explored.min() < 0.0 or explored.max() > 1.0):
            raise ValueError("explored cell values must lie in [0, 1]")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "resolution", float(self.resolution))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def unexplored(cls, width, height, resolution=0.02, origin=(0.0, 0.0)):
        return cls(np.full((height, width), np.nan), resolution, origin)

    @property
    def width(self):
        return self.cells.shape[1]

    @property
    def height(self):
        return self.cells.shape[0]

    @property
    def shape(self):
        return self.cells.shape

    @property
    def explored(self):
        return ~np.isnan(self.cells)

    def with_cells(self, cells, origin=None):
        """Same metadata, new values (and optionally a shifted origin)."""
        return type(self)(cells, self.resolution, self.origin if origin is None else origin)

    def cell_to_world(self, cells):
        cells = np.asarray(cells, dtype=float)
        return np.asarray(self.origin) + cells * self.resolution

    def world_to_cell(self, points):
        points = np.asarray(points, dtype=float)
        return floor_cells((points - np.asarray(self.origin)) / self.resolution)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return (
            self.resolution == other.resolution
            and self.origin == other.origin
            and np.array_equal(self.cells, other.cells, equal_nan=True)
        )

    __hash__ = None


class OccupancyGrid(_Grid):
    """Per-cell occupancy probabilities; NaN marks unexplored cells."""

    @property
    def occupied(self):
        with np.errstate(invalid="ignore"):
            return self.cells >= OCCUPIED_THRESHOLD

    @property
    def free(self):
        with np.errstate(invalid="ignore"):
            return self.cells < OCCUPIED_THRESHOLD

    def occupied_points(self):
        """Occupied cells as an ``(n, 2)`` float array of ``(x, y)`` cell coordinates."""
        rows, cols = np.nonzero(self.occupied)
        return np.column_stack([cols, rows]).astype(float)


class CoverageGrid(_Grid):
    """Per-cell coverage in [0, 1]; NaN marks uncovered cells."""


def rotation_matrix(theta):
    """2-D rotation matrix, exact for multiples of pi/2."""
    quarter = theta / (math.pi / 2)
    k = round(quarter)
    if abs(quarter - k) < 1e-12:
        c, s = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][k % 4]
    else:
        c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def normalize_angle(theta):
    """Wrap radians into (-pi, pi]."""
    wrapped = math.remainder(theta, 2 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


@dataclass(frozen=True)
class RigidTransform2D:
    """``p -> R(theta) p + t``; theta in radians, ``t`` in cells."""

    theta: float = 0.0
    t: tuple = field(default=(0.0, 0.0))

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))
        object.__setattr__(self, "t", (float(self.t[0]), float(self.t[1])))

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def about(cls, theta, source_anchor=(0.0, 0.0), dest_anchor=(0.0, 0.0), t=(0.0, 0.0)):
        """Rotate about ``source_anchor`` and place it on ``dest_anchor + t``."""
        rot = rotation_matrix(theta)
        shift = np.asarray(dest_anchor, float) + np.asarray(t, float) - rot @ np.asarray(source_anchor, float)
        return cls(theta, tuple(shift))

    @property
    def matrix(self):
        return rotation_matrix(self.theta)

    @property
    def degrees(self):
        return math.degrees(self.theta)

    def apply(self, points):
        """Transform an ``(n, 2)`` array (or a single point)."""
        pts = np.asarray(points, dtype=float)
        rot = self.matrix
        x = rot[0, 0] * pts[..., 0] + rot[0, 1] * pts[..., 1] + self.t[0]
        y = rot[1, 0] * pts[..., 0] + rot[1, 1] * pts[..., 1] + self.t[1]
        return np.stack([x, y], axis=-1)

    def compose(self, other):
        """Return ``self ∘ other`` (``other`` is applied first)."""
        rot = self.matrix
        t = rot @ np.asarray(other.t) + np.asarray(self.t)
        return RigidTransform2D(self.theta + other.theta, tuple(t))

    def inverse(self):
        rot_t = self.matrix.T
        return RigidTransform2D(-self.theta, tuple(-(rot_t @ np.asarray(self.t))))


def apply_transform_point(p, T, source_anchor=(0.0, 0.0), dest_anchor=(0.0, 0.0)):
    """``R(theta) (p - source_anchor) + dest_anchor + t`` without rounding."""
    p = np.asarray(p, dtype=float)
    rel = p - np.asarray(source_anchor, dtype=float)
    return RigidTransform2D(T.theta).apply(rel) + np.asarray(dest_anchor, float) + np.asarray(T.t)


def confidence(values):
    """``|v - 0.5|`` rounded so that mirror values such as 0.2 and 0.8 tie exactly."""
    return np.round(np.abs(np.asarray(values, dtype=float) - 0.5), 12)


def reduce_by_confidence(index, values, size):
    """Collapse values sharing a flat cell index with the max-confidence rule.

    Confidence of a value is ``|v - 0.5|``; the most confident value wins and
    equally confident values are averaged.  Returns ``(target_index, value)``.
    """
    index = np.asarray(index)
    values = np.asarray(values, dtype=float)
    if index.size == 0:
        return index, values
    conf = confidence(values)
    best = np.full(size, -1.0)
    np.maximum.at(best, index, conf)
    keep = conf == best[index]
    total = np.zeros(size)
    count = np.zeros(size)
    np.add.at(total, index[keep], values[keep])
    np.add.at(count, index[keep], 1.0)
    target = np.nonzero(count)[0]
    return target, total[target] / count[target]


def transformed_cell_bounds(grid, T, source_anchor=(0.0, 0.0), dest_anchor=(0.0, 0.0)):
    """Integer (min, max) corners of the floor-rounded image of the explored cells."""
    rows, cols = np.nonzero(grid.explored)
    if rows.size == 0:
        return None
    pts = np.column_stack([cols, rows]).astype(float)
    dest = floor_cells(apply_transform_point(pts, T, source_anchor, dest_anchor))
    return dest.min(axis=0), dest.max(axis=0)


def apply_transform_grid(src, T, source_anchor=(0.0, 0.0), dest_anchor=(0.0, 0.0),
                         shape=None, offset=None, margin=2, dest_origin=None):
    """Forward-map every explored source cell through ``T`` into a new grid.

    Each explored cell point is transformed, floor-rounded, and written to the
    destination; cells hit by several sources are resolved with
    :func:`reduce_by_confidence`.  Destination cells nothing maps to stay
    unexplored, so non-right-angle rotations leave the rounding gaps visible.

    ``offset`` is the destination-frame cell stored at output index (0, 0).
    Without ``shape`` the canvas is grown to the transformed hull plus
    ``margin`` cells.  ``dest_origin`` is the world origin of the destination
    frame (defaults to the source origin).
    """
    dest_origin = src.origin if dest_origin is None else dest_origin
    rows, cols = np.nonzero(src.explored)
    values = src.cells[rows, cols]
    pts = np.column_stack([cols, rows]).astype(float)
    dest = floor_cells(apply_transform_point(pts, T, source_anchor, dest_anchor)).reshape(-1, 2)
    if shape is None:
        if dest.size:
            lo, hi = dest.min(axis=0) - margin, dest.max(axis=0) + margin
        else:
            lo, hi = np.zeros(2, int), np.zeros(2, int)
        offset = lo if offset is None else np.asarray(offset)
        shape = (int(hi[1] - offset[1] + 1), int(hi[0] - offset[0] + 1))
    offset = np.zeros(2, int) if offset is None else np.asarray(offset, dtype=np.int64)
    h, w = shape
    local = dest - offset
    inside = (local[:, 0] >= 0) & (local[:, 0] < w) & (local[:, 1] >= 0) & (local[:, 1] < h)
    flat = local[inside, 1] * w + local[inside, 0]
    target, merged = reduce_by_confidence(flat, values[inside], h * w)
    out = np.full(h * w, np.nan)
    out[target] = merged
    origin = np.asarray(dest_origin, float) + offset * src.resolution
    return type(src)(out.reshape(h, w), src.resolution, tuple(origin))


def embed(grid, offset, shape):
    """Place ``grid`` on a larger canvas whose index (0, 0) is cell ``offset`` of ``grid``."""
    offset = np.asarray(offset, dtype=np.int64)
    h, w = shape
    out = np.full((h, w), np.nan)
    x0, y0 = -offset
    ys, xs = slice(max(y0, 0), min(y0 + grid.height, h)), slice(max(x0, 0), min(x0 + grid.width, w))
    out[ys, xs] = grid.cells[ys.start - y0:ys.stop - y0, xs.start - x0:xs.stop - x0]
    origin = np.asarray(grid.origin) + offset * grid.resolution
    return type(grid)(out, grid.resolution, tuple(origin))


def canvas_for(dst, src, T, source_anchor=(0.0, 0.0), dest_anchor=(0.0, 0.0), margin=2):
    """Offset and shape of a canvas holding ``dst`` and the transformed ``src``.

    ``dst`` keeps its extent; ``margin`` cells are added only where ``src`` reaches past it.
    """
    lo = np.array([0, 0])
    hi = np.array([dst.width - 1, dst.height - 1])
    bounds = transformed_cell_bounds(src, T, source_anchor, dest_anchor)
    if bounds is not None:
        lo = np.minimum(lo, bounds[0] - margin)
        hi = np.maximum(hi, bounds[1] + margin)
    return lo, (int(hi[1] - lo[1] + 1), int(hi[0] - lo[0] + 1))


def interior_gaps(grid):
    """Unexplored cells strictly inside the convex hull of the explored cells."""
    rows, cols = np.nonzero(grid.explored)
    mask = np.zeros(grid.shape, dtype=bool)
    if rows.size < 3:
        return mask
    pts = np.column_stack([cols, rows]).astype(float)
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return mask
    gy, gx = np.nonzero(~grid.explored)
    if gy.size == 0:
        return mask
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    box = (gx > lo[0]) & (gx < hi[0]) & (gy > lo[1]) & (gy < hi[1])
    gx, gy = gx[box], gy[box]
    q = np.column_stack([gx, gy]).astype(float)
    dist = q @ hull.equations[:, :2].T + hull.equations[:, 2]
    inside = np.all(dist < -1e-9, axis=1)
    mask[gy[inside], gx[inside]] = True
    return mask
