"""PNG and PGM views of maps, alignments, wall lines and tag probability fields."""

from __future__ import annotations

import numpy as np
from PIL import Image

from .grid import floor_cells
from .lines import segment_cells
from .mapio import encode

# Overlay colours per method: rfid_only red, ogm_vector green, icp_refined blue.
METHOD_COLORS = {1: (220, 30, 30), 2: (30, 170, 30), 3: (30, 60, 220)}


def grid_rgb(grid):
    gray = encode(grid.cells)
    return np.repeat(gray[:, :, None], 3, axis=2)


def overlay(base, layers):
    """Map ``base`` with point layers painted on top.

    ``layers`` is a list of ``(points, rgb)``; points are float cell
    coordinates in ``base``'s frame, later layers drawn over earlier ones.
    """
    img = grid_rgb(base)
    for points, color in layers:
        cells = floor_cells(np.asarray(points, float)).reshape(-1, 2)
        ok = (cells[:, 0] >= 0) & (cells[:, 0] < base.width) & (cells[:, 1] >= 0) & (cells[:, 1] < base.height)
        img[cells[ok, 1], cells[ok, 0]] = color
    return img


def field_gray(values):
    """Probability field as 8-bit gray, white at its maximum."""
    v = np.asarray(values, float)
    top = v.max()
    return np.rint((v / top if top > 0 else v) * 255).astype(np.uint8)


def line_layers(lines, colors):
    """Overlay layers drawing each segment's cells; ``colors[i]`` is line ``i``'s rgb."""
    return [(segment_cells(line.p1, line.p2), color) for line, color in zip(lines, colors)]


def save_pgm(path, gray):
    Image.fromarray(np.asarray(gray, dtype=np.uint8), mode="L").save(path, format="PPM")


def save_png(path, image):
    Image.fromarray(np.asarray(image, dtype=np.uint8)).save(path, format="PNG")
