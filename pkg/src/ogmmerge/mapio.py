"""Map bundles on disk: 8-bit PGM rasters plus a YAML metadata sidecar.

Pixel encoding follows the ROS map_server convention: 0 is occupied, 255 is
free and 127 marks unexplored cells.  An explored value ``v`` is stored as
``round((1 - v) * 255)``; the one value that would land on 127 is nudged to
128 so it stays explored.  Values already on that lattice survive a
save/load round trip bit-for-bit (see :func:`quantize`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml
from PIL import Image, UnidentifiedImageError

from .errors import MapFormatError
from .grid import CoverageGrid, OccupancyGrid
from .rfid import TagEstimate

UNEXPLORED_PIXEL = 127


def encode(cells):
    """Occupancy values (NaN = unexplored) to uint8 pixels."""
    cells = np.asarray(cells, dtype=float)
    explored = ~np.isnan(cells)
    pixels = np.full(cells.shape, UNEXPLORED_PIXEL, dtype=np.uint8)
    coded = np.rint((1.0 - cells[explored]) * 255.0).astype(np.uint8)
    coded[coded == UNEXPLORED_PIXEL] = UNEXPLORED_PIXEL + 1
    pixels[explored] = coded
    return pixels


def decode(pixels):
    pixels = np.asarray(pixels)
    cells = 1.0 - pixels.astype(float) / 255.0
    cells[pixels == UNEXPLORED_PIXEL] = np.nan
    return cells


def quantize(grid):
    """The grid as it will read back after :func:`save_map`."""
    return grid.with_cells(decode(encode(grid.cells)))


@dataclass
class MapBundle:
    """One robot's map: occupancy, optional coverage, localized tags and free-form metadata."""

    occupancy: OccupancyGrid
    coverage: CoverageGrid | None = None
    tags: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.coverage is not None and self.coverage.shape != self.occupancy.shape:
            raise ValueError(f"coverage shape {self.coverage.shape} != occupancy shape {self.occupancy.shape}")

    def tag_map(self):
        return {t.tag_id: t for t in self.tags}


def _sidecar_paths(path):
    path = Path(path)
    stem = path.with_suffix("")
    return stem.with_suffix(".yaml"), stem.with_suffix(".pgm"), Path(f"{stem}.coverage.pgm")


def _write_pgm(path, cells):
    Image.fromarray(encode(cells), mode="L").save(path, format="PPM")


def _read_pgm(path):
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode != "L":
                raise MapFormatError(path, f"expected 8-bit grayscale PGM, got mode {img.mode}")
            return np.array(img)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        if isinstance(exc, FileNotFoundError):
            raise
        raise MapFormatError(path, f"unreadable PGM ({exc})") from exc


def save_map(path, bundle):
    """Write ``<stem>.pgm``, ``<stem>.yaml`` and, with coverage, ``<stem>.coverage.pgm``."""
    meta_path, pgm_path, cov_path = _sidecar_paths(path)
    meta_path.parent.mkdir(parents=True, exist_ok=True)
    grid = bundle.occupancy
    _write_pgm(pgm_path, grid.cells)
    if bundle.coverage is not None:
        _write_pgm(cov_path, bundle.coverage.cells)
    meta = {
        "image": pgm_path.name,
        "coverage": cov_path.name if bundle.coverage is not None else None,
        "resolution": grid.resolution,
        "origin": [grid.origin[0], grid.origin[1], 0.0],
        "width": grid.width,
        "height": grid.height,
        "negate": 0,
        "tags": [t.to_json() for t in bundle.tags],
        "metadata": dict(bundle.metadata),
    }
    meta_path.write_text(yaml.safe_dump(meta, sort_keys=False), encoding="utf-8")
    return meta_path


def load_map(path):
    """Read a bundle written by :func:`save_map`; ``path`` may name the YAML or the PGM."""
    meta_path, _, _ = _sidecar_paths(path)
    if not meta_path.exists():
        raise FileNotFoundError(meta_path)
    try:
        meta = yaml.safe_load(meta_path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise MapFormatError(meta_path, f"invalid YAML ({exc})") from exc
    if not isinstance(meta, dict):
        raise MapFormatError(meta_path, "metadata must be a mapping")
    try:
        resolution = float(meta["resolution"])
        origin = (float(meta["origin"][0]), float(meta["origin"][1]))
        width, height = int(meta["width"]), int(meta["height"])
        image = meta["image"]
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise MapFormatError(meta_path, f"missing or malformed field ({exc})") from exc

    def raster(name):
        pixels = _read_pgm(meta_path.parent / name)
        if pixels.shape != (height, width):
            raise MapFormatError(meta_path, f"{name} is {pixels.shape[1]}x{pixels.shape[0]}, "
                                            f"metadata says {width}x{height}")
        return decode(pixels)

    try:
        occupancy = OccupancyGrid(raster(image), resolution, origin)
        coverage = None
        if meta.get("coverage"):
            coverage = CoverageGrid(raster(meta["coverage"]), resolution, origin)
        tags = [TagEstimate.from_json(t) for t in meta.get("tags") or []]
    except (KeyError, TypeError, ValueError) as exc:
        raise MapFormatError(meta_path, str(exc)) from exc
    return MapBundle(occupancy, coverage, tags, dict(meta.get("metadata") or {}))
