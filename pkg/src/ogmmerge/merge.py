"""End-to-end merging of two robots' map bundles with one of three methods.

1. ``rfid_only``: rotation and translation from the common tags alone.
2. ``ogm_vector``: rotation from the two maps' wall directions, quarter turn
   and translation from the tags.
3. ``icp_refined``: method 2 followed by ICP on the overlapping walls.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InsufficientTagsError
from .grid import apply_transform_grid, canvas_for, embed, floor_cells
from .icp import IcpParams, refine
from .lines import RansacParams, extract_lines
from .mapio import MapBundle
from .metrics import chamfer_mse
from .ogm_vector import classify_groups, ogm_vector, relative_rotation
from .pipeline import STAGES, baseline_rfid_only, gate_and_sort, ogm_solution
from .raster import conditional_blur, fuse, fuse_coverage
from .rfid import ANCHOR_PROBABILITY, MIN_PROBABILITY

log = logging.getLogger(__name__)

METHODS = {1: "rfid_only", 2: "ogm_vector", 3: "icp_refined"}


@dataclass(frozen=True)
class MergeConfig:
    ransac: RansacParams = RansacParams()
    icp: IcpParams = IcpParams()
    weighting: str = "reliability"
    min_probability: float = MIN_PROBABILITY
    anchor_probability: float = ANCHOR_PROBABILITY
    blur: bool = True


@dataclass
class Estimate:
    """A solution plus what was computed on the way to it."""

    solution: object
    tags: object
    ogm: tuple = ()  # (OgmVector map 1, OgmVector map 2)
    lines: tuple = ()  # (lines map 1, lines map 2)
    icp: object = None
    elapsed_ms: float = 0.0


def method_stage(method):
    if method in METHODS:
        return METHODS[method]
    if method in STAGES:
        return method
    raise ValueError(f"unknown method {method!r}; expected 1, 2, 3 or one of {STAGES}")


def gated_tags(bundle1, bundle2, config=MergeConfig()):
    tags = gate_and_sort(bundle1.tags, bundle2.tags, config.min_probability, config.anchor_probability)
    if tags is None:
        raise InsufficientTagsError("fewer than three common tags pass the localization gate")
    return tags


def map_ogm_vector(grid, config=MergeConfig(), lines=None):
    """Lines and OGM vector of one map."""
    if lines is None:
        lines = extract_lines(grid, config.ransac)
    if not lines:
        raise ValueError("no wall lines survive extraction")
    return lines, ogm_vector(classify_groups(lines), config.weighting)


def estimate_solution(bundle1, bundle2, method, config=MergeConfig(), lines=None):
    """Transform from map 2 to map 1 with the chosen method.

    ``lines`` may carry pre-extracted ``(lines1, lines2)`` to skip RANSAC.
    """
    stage = method_stage(method)
    start = time.perf_counter()
    tags = gated_tags(bundle1, bundle2, config)
    if stage == "rfid_only":
        solution = baseline_rfid_only(tags)
        return Estimate(solution, tags, elapsed_ms=(time.perf_counter() - start) * 1e3)
    lines = lines or (None, None)
    l1, v1 = map_ogm_vector(bundle1.occupancy, config, lines[0])
    l2, v2 = map_ogm_vector(bundle2.occupancy, config, lines[1])
    solution = ogm_solution(relative_rotation(v1, v2), tags)
    result = None
    if stage == "icp_refined":
        solution, result = refine(solution, bundle1.occupancy.occupied_points(),
                                  bundle2.occupancy.occupied_points(), config.icp)
    return Estimate(solution, tags, (v1, v2), (l1, l2), result, (time.perf_counter() - start) * 1e3)


@dataclass
class MergeReport:
    method: str
    solution: object
    mse: float
    estimate_ms: float
    total_ms: float
    ogm: tuple = ()
    icp: object = None
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "method": self.method,
            "solution": self.solution.to_json(),
            "mse_px2": self.mse,
            "estimate_ms": self.estimate_ms,
            "total_ms": self.total_ms,
            "ogm_vectors": [v.to_json() for v in self.ogm],
            "icp": None if self.icp is None else self.icp.to_json(),
            **self.extra,
        }


def _merged_tags(bundle1, bundle2, transform, offset):
    merged = {}
    for tag in bundle2.tags:
        x, y = transform.apply(np.asarray(tag.map_pose, float))
        merged[tag.tag_id] = replace(tag, map_pose=(int(np.floor(x + 1e-9)), int(np.floor(y + 1e-9))))
    for tag in bundle1.tags:
        other = merged.get(tag.tag_id)
        if other is None or tag.probability >= other.probability:
            merged[tag.tag_id] = tag
    return [replace(t, map_pose=(t.map_pose[0] - int(offset[0]), t.map_pose[1] - int(offset[1])))
            for _, t in sorted(merged.items())]


def apply_solution(bundle1, bundle2, solution, blur=True):
    """Raster map 2 into map 1's frame, fuse both and blur once.

    ``blur`` is True for the conditional blur, False for none, or a callable
    taking and returning an occupancy grid.  The merged grid may be larger
    than map 1; ``metadata["canvas_offset"]`` is the map-1 cell stored at
    index (0, 0).
    """
    transform = solution.transform()
    occ1, occ2 = bundle1.occupancy, bundle2.occupancy
    offset, shape = canvas_for(occ1, occ2, transform)
    moved = apply_transform_grid(occ2, transform, shape=shape, offset=offset, dest_origin=occ1.origin)
    occupancy = fuse(embed(occ1, offset, shape), moved)
    coverage = None
    if bundle1.coverage is not None or bundle2.coverage is not None:
        parts = []
        if bundle1.coverage is not None:
            parts.append(embed(bundle1.coverage, offset, shape))
        if bundle2.coverage is not None:
            parts.append(apply_transform_grid(bundle2.coverage, transform, shape=shape, offset=offset,
                                              dest_origin=occ1.origin))
        coverage = parts[0] if len(parts) == 1 else fuse_coverage(*parts)
    if blur is True:
        free = occupancy.free
        occupancy = conditional_blur(occupancy)
        if coverage is not None:
            coverage = conditional_blur(coverage, free_mask=free)
    elif blur:
        occupancy = blur(occupancy)
    tags = _merged_tags(bundle1, bundle2, transform, offset)
    meta = {"robot": "+".join(str(b.metadata.get("robot", i)) for i, b in ((1, bundle1), (2, bundle2))),
            "canvas_offset": [int(offset[0]), int(offset[1])]}
    return MapBundle(occupancy, coverage, tags, meta)


def overlap_mse(grid1, grid2, transform):
    """Chamfer MSE of map 2's walls that land on explored map-1 cells against map 1's walls.

    Walls map 1 never saw have no counterpart, so they are left out.
    """
    moved = transform.apply(grid2.occupied_points())
    cells = floor_cells(moved).reshape(-1, 2)
    ok = (cells[:, 0] >= 0) & (cells[:, 0] < grid1.width) & (cells[:, 1] >= 0) & (cells[:, 1] < grid1.height)
    ok[ok] = grid1.explored[cells[ok, 1], cells[ok, 0]]
    if not ok.any():
        return float("nan")
    return chamfer_mse(moved[ok], grid1.occupied_points())


def merge_maps_end_to_end(bundle1, bundle2, method=3, config=MergeConfig()):
    """Estimate the transform, raster and fuse the maps, and report the wall alignment error.

    The MSE is :func:`overlap_mse` in px^2.
    """
    start = time.perf_counter()
    est = estimate_solution(bundle1, bundle2, method, config)
    merged = apply_solution(bundle1, bundle2, est.solution, config.blur)
    merged.metadata["solution"] = est.solution.to_json()
    error = overlap_mse(bundle1.occupancy, bundle2.occupancy, est.solution.transform())
    report = MergeReport(est.solution.stage, est.solution, error, est.elapsed_ms,
                         (time.perf_counter() - start) * 1e3, est.ogm, est.icp)
    return merged, report
