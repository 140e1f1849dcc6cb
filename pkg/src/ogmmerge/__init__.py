"""Occupancy grid map merging with RFID tags, wall-direction vectors and ICP."""

from .grid import CoverageGrid, OccupancyGrid, RigidTransform2D

__version__ = "0.1.0"

__all__ = ["CoverageGrid", "OccupancyGrid", "RigidTransform2D", "__version__"]
