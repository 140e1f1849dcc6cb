"""Range-only RFID tag localization on a discrete probability field.

Every time a tag is read at distance ``D`` from robot pose ``P_R`` a ring
likelihood centred on ``P_R`` is multiplied into the tag's field and the
result renormalized.  Tags are static, so the update is a pure measurement
product.  The field lives in the robot's map frame: field cell ``(c, r)`` is
map cell ``offset + (c, r)``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ReadingRejected
from .grid import floor_cells

log = logging.getLogger(__name__)

ANTENNA_RANGE = 3.0  # m
NOISE_SIGMA = 0.05  # m
FIELD_SIZE = 300  # cells per side
SUBSAMPLE = 3
MIN_PROBABILITY = 0.75
ANCHOR_PROBABILITY = 0.90


@dataclass(frozen=True)
class TagReading:
    """One noisy range reading; ``x``, ``y`` and ``d`` in meters (map frame)."""

    tag_id: int
    x: float
    y: float
    d: float
    iteration: int = 0

    def to_json(self):
        return {"tag_id": self.tag_id, "x": self.x, "y": self.y, "d": self.d, "iter": self.iteration}

    @classmethod
    def from_json(cls, record):
        return cls(int(record["tag_id"]), float(record["x"]), float(record["y"]),
                   float(record["d"]), int(record.get("iter", 0)))


@dataclass(frozen=True)
class RingParams:
    sigma: float = NOISE_SIGMA
    antenna_range: float = ANTENNA_RANGE


@dataclass(frozen=True, eq=False)
class ProbabilityField:
    """Tag-pose likelihood over a window of map cells."""

    values: np.ndarray
    offset: tuple = (0, 0)
    resolution: float = 0.02
    map_origin: tuple = (0.0, 0.0)
    update_count: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2 or values.size == 0:
            raise ValueError("probability field must be a non-empty 2-D array")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("probability field values must be finite and non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "offset", (int(self.offset[0]), int(self.offset[1])))

    @classmethod
    def uniform(cls, center, size=FIELD_SIZE, resolution=0.02, map_origin=(0.0, 0.0)):
        """Uniform prior over a ``size`` x ``size`` window centred on ``center`` (meters)."""
        rel = (np.asarray(center, float) - np.asarray(map_origin, float)) / resolution
        c = floor_cells(rel)
        offset = (int(c[0]) - size // 2, int(c[1]) - size // 2)
        return cls(np.full((size, size), 1.0 / (size * size)), offset, resolution, map_origin)

    @property
    def shape(self):
        return self.values.shape

    def cell_centers(self):
        """World (map-frame) x and y of every field cell, as two broadcastable arrays."""
        rows, cols = self.values.shape
        ox, oy = self.map_origin
        xs = ox + (self.offset[0] + np.arange(cols)) * self.resolution
        ys = oy + (self.offset[1] + np.arange(rows)) * self.resolution
        return xs[None, :], ys[:, None]

    def total(self):
        return float(self.values.sum())


def _ring_values(field_, pose, distance, params):
    if not 0.0 < distance <= params.antenna_range:
        raise ReadingRejected(f"distance {distance!r} outside (0, {params.antenna_range}] m")
    xs, ys = field_.cell_centers()
    r = np.hypot(xs - pose[0], ys - pose[1])
    return np.exp(-((r - distance) ** 2) / (2.0 * params.sigma ** 2))


def ring_likelihood(field_, pose, distance, params=RingParams()):
    """Normalized Gaussian annulus of radius ``distance`` around ``pose``.

    Only the geometry of ``field_`` (window, resolution) is used.
    """
    ring = _ring_values(field_, pose, distance, params)
    return replace(field_, values=ring / ring.sum(), update_count=1)


def _support(values):
    rows = np.flatnonzero(values.any(axis=1))
    cols = np.flatnonzero(values.any(axis=0))
    if rows.size == 0:
        return None
    return slice(rows[0], rows[-1] + 1), slice(cols[0], cols[-1] + 1)


def bayes_update(field_, reading, params=RingParams()):
    """Multiply the reading's ring into ``field_`` and renormalize.

    Cells that already hold zero stay zero, so the ring is only evaluated on
    the bounding box of the current support.  If the product vanishes
    everywhere (an outlier ring disjoint from the belief) the field restarts
    from the new ring.
    """
    pose = (reading.x, reading.y)
    if not 0.0 < reading.d <= params.antenna_range:
        raise ReadingRejected(f"distance {reading.d!r} outside (0, {params.antenna_range}] m")
    product = np.zeros(field_.shape)
    window = _support(field_.values)
    if window is not None:
        xs, ys = field_.cell_centers()
        r = np.hypot(xs[:, window[1]] - pose[0], ys[window[0], :] - pose[1])
        ring = np.exp(-((r - reading.d) ** 2) / (2.0 * params.sigma ** 2))
        product[window] = field_.values[window] * ring
    total = product.sum()
    if not np.isfinite(total) or total <= 0.0:
        log.warning("tag %s: posterior vanished at iteration %s, resetting to latest ring",
                    reading.tag_id, reading.iteration)
        product = _ring_values(field_, pose, reading.d, params)
        total = product.sum()
    return replace(field_, values=product / total, update_count=field_.update_count + 1)


@dataclass(frozen=True)
class TagEstimate:
    """MAP cell of a tag in one robot's map frame plus its localization probability."""

    tag_id: int
    map_pose: tuple
    probability: float
    update_count: int = 0
    robot: str = ""

    def to_json(self):
        return {"id": self.tag_id, "x": int(self.map_pose[0]), "y": int(self.map_pose[1]),
                "probability": float(self.probability), "update_count": int(self.update_count),
                "robot": self.robot}

    @classmethod
    def from_json(cls, record):
        return cls(int(record["id"]), (int(record["x"]), int(record["y"])),
                   float(record["probability"]), int(record.get("update_count", 0)),
                   str(record.get("robot", "")))


def block_phase(index, length, k=SUBSAMPLE):
    """Tiling phase that puts ``index`` at the centre of a ``k``-block kept inside ``length``."""
    start = min(max(index - k // 2, 0), max(length - k, 0))
    return start % k


def coarse_field(values, phase=(0, 0), k=SUBSAMPLE):
    """Sub-sample by ``k``: block masses over ``k`` x ``k`` squares.

    ``phase`` = (row, col) index where the first full block starts; cells
    before it form a partial edge block, as do cells left over at the end.
    """
    rows, cols = values.shape
    fr, fc = (k - phase[0]) % k, (k - phase[1]) % k
    br, bc = -(rows + fr) % k, -(cols + fc) % k
    padded = np.pad(values, ((fr, br), (fc, bc)))
    blocks = padded.reshape(padded.shape[0] // k, k, padded.shape[1] // k, k)
    return blocks.sum(axis=(1, 3))


def extract_estimate(field_, tag_id=-1, robot=""):
    """MAP cell of the fine field and the probability of the area around it.

    The field is sub-sampled into 3 x 3 blocks tiled so that the MAP cell is
    the centre of its block; the probability is the largest block mass over
    the total mass.  With full blocks this equals max/sum over block means.
    """
    values = field_.values
    row, col = np.unravel_index(np.argmax(values), values.shape)
    phase = (block_phase(row, values.shape[0]), block_phase(col, values.shape[1]))
    coarse = coarse_field(values, phase)
    total = coarse.sum()
    probability = float(coarse.max() / total) if total > 0 else 0.0
    pose = (field_.offset[0] + int(col), field_.offset[1] + int(row))
    return TagEstimate(tag_id, pose, min(probability, 1.0), field_.update_count, robot)


@dataclass
class TagLocalizer:
    """Keeps one probability field per tag seen by a single robot."""

    robot: str = ""
    resolution: float = 0.02
    map_origin: tuple = (0.0, 0.0)
    size: int = FIELD_SIZE
    params: RingParams = RingParams()
    fields: dict = field(default_factory=dict)

    def observe(self, reading):
        current = self.fields.get(reading.tag_id)
        if current is None:
            current = ProbabilityField.uniform((reading.x, reading.y), self.size,
                                               self.resolution, self.map_origin)
        self.fields[reading.tag_id] = bayes_update(current, reading, self.params)

    def observe_all(self, readings):
        for reading in readings:
            self.observe(reading)
        return self

    def estimate(self, tag_id):
        return extract_estimate(self.fields[tag_id], tag_id, self.robot)

    def estimates(self):
        return [self.estimate(tag_id) for tag_id in sorted(self.fields)]


def read_readings(path):
    """Parse a JSON-lines stream of ``{tag_id, x, y, d, iter}`` records."""
    readings = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                readings.append(TagReading.from_json(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad reading record ({exc})") from exc
    return readings


def write_readings(path, readings):
    Path(path).write_text("".join(json.dumps(r.to_json()) + "\n" for r in readings), encoding="utf-8")
