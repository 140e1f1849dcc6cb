import numpy as np

from ogmmerge.grid import OccupancyGrid


def grid_from(cells, resolution=0.02, origin=(0.0, 0.0)):
    return OccupancyGrid(np.asarray(cells, dtype=float), resolution, origin)


def rectangle_outline(width=260, height=210, x0=30, y0=30, w=200, h=150):
    """Fully explored grid with a one-cell-thick axis-aligned rectangle outline."""
    cells = np.zeros((height, width))
    cells[y0, x0:x0 + w + 1] = 1.0
    cells[y0 + h, x0:x0 + w + 1] = 1.0
    cells[y0:y0 + h + 1, x0] = 1.0
    cells[y0:y0 + h + 1, x0 + w] = 1.0
    return grid_from(cells)


def rotated_block(value=0.0, degrees=30.0):
    """The 25-cell block (98..102)^2 rotated about (200, 200) and placed at (300, 300)."""
    import math

    from ogmmerge.grid import RigidTransform2D, apply_transform_grid

    cells = np.full((110, 110), np.nan)
    cells[98:103, 98:103] = value
    src = grid_from(cells)
    return apply_transform_grid(src, RigidTransform2D(math.radians(degrees)), (200, 200), (300, 300))


ACCEPTANCE = []  # PASS/FAIL lines collected by test_acceptance.py
