"""Cell-wise fusion of two aligned grids and the 3x3 blur that repairs rounding holes."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import correlate

from .grid import OCCUPIED_THRESHOLD, confidence

BLUR_MASK = np.full((3, 3), 1.0 / 9.0)
GAP_FILL_MIN = 6
_ONES = np.ones((3, 3))


def _check_frame(a, b):
    if a.shape != b.shape:
        raise ValueError(f"grid shapes differ: {a.shape} vs {b.shape}")
    if a.resolution != b.resolution or not np.allclose(a.origin, b.origin):
        raise ValueError("grids are not in the same frame")


def fuse(dst, src):
    """Combine two grids of one frame.

    Where only one side is explored its value is taken.  Where both are, the
    more confident value (larger ``|v - 0.5|``) wins and ties are averaged.
    """
    _check_frame(dst, src)
    a, b = dst.cells, src.cells
    out = np.where(np.isnan(a), b, a)
    both = ~np.isnan(a) & ~np.isnan(b)
    ca, cb = confidence(a[both]), confidence(b[both])
    out[both] = np.where(ca > cb, a[both], np.where(cb > ca, b[both], (a[both] + b[both]) / 2.0))
    return dst.with_cells(out)


def fuse_coverage(dst, src):
    """Coverage union: the larger value where both grids have one."""
    _check_frame(dst, src)
    return dst.with_cells(np.fmax(dst.cells, src.cells))


def _neighbourhood(values, mask):
    """3x3 sums of ``values`` over ``mask`` cells and the number of such cells."""
    total = correlate(np.where(mask, values, 0.0), _ONES, mode="constant", cval=0.0)
    count = correlate(mask.astype(float), _ONES, mode="constant", cval=0.0)
    return total, np.rint(count)


def conditional_blur(grid, free_mask=None, gap_fill_min=GAP_FILL_MIN):
    """Smooth explored free cells and fill small holes, leaving walls untouched.

    Each explored free cell becomes the mean of the explored free cells in its
    3x3 neighbourhood (itself included), so wall values never leak into free
    space.  An unexplored cell with at least ``gap_fill_min`` explored free
    neighbours is filled with their mean.  Every other cell is copied.

    ``free_mask`` overrides which cells count as free; it lets a coverage grid
    follow the occupancy grid it belongs to.
    """
    cells = grid.cells
    explored = ~np.isnan(cells)
    if free_mask is None:
        with np.errstate(invalid="ignore"):
            free_mask = cells < OCCUPIED_THRESHOLD
    free = explored & free_mask
    total, count = _neighbourhood(cells, free)
    out = cells.copy()
    out[free] = total[free] / count[free]
    fill = ~explored & (count >= gap_fill_min)
    out[fill] = total[fill] / count[fill]
    return grid.with_cells(out)


def unconditional_blur(grid):
    """Plain 3x3 mean over explored neighbours, applied to every cell that has one.

    This is the variant without the free-cell condition: walls spread into
    free space and explored values spread into unexplored cells.
    """
    cells = grid.cells
    explored = ~np.isnan(cells)
    total, count = _neighbourhood(cells, explored)
    out = np.full(cells.shape, np.nan)
    hit = count > 0
    out[hit] = total[hit] / count[hit]
    return grid.with_cells(out)
