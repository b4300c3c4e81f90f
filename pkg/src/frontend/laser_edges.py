"""Depth-discontinuity edge points on organized laser scans.

A valid point is an edge when one side of its ring window sits at the same
depth and the other side is entirely farther away. Only the near-side point of
a discontinuity qualifies, since that is the one still visible from a camera.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from src.core.logging import get_logger
from src.exceptions import InvalidArgumentError
from src.pointcloud import OrganizedScan, PointCloud

logger = get_logger(__name__)


class LaserEdgeParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int = Field(default=3, ge=1, description="Neighbourhood radius in columns")
    epsilon: float = Field(default=0.3, gt=0, description="Depth-difference threshold in meters")
    wrap: bool = Field(default=True, description="Ring windows wrap around a full 360 degree sweep")


def _side_predicates(
    ranges: NDArray[np.float64],
    valid: NDArray[np.bool_],
    k: int,
    epsilon: float,
    step: int,
    wrap: bool,
) -> tuple[NDArray[np.bool_], NDArray[np.bool_], NDArray[np.bool_]]:
    """(same-depth, all-farther, all-valid) over the k neighbours in direction ``step``."""
    rings, cols = ranges.shape
    alpha = np.ones_like(valid)
    beta = np.ones_like(valid)
    ok = np.ones_like(valid)
    col_idx = np.arange(cols)
    for j in range(1, k + 1):
        shift = -step * j
        r_n = np.roll(ranges, shift, axis=1)
        v_n = np.roll(valid, shift, axis=1)
        if not wrap:
            target = col_idx + step * j
            v_n = v_n & ((target >= 0) & (target < cols))[None, :]
        diff = r_n - ranges
        ok &= v_n
        alpha &= np.abs(diff) <= epsilon
        beta &= diff > epsilon
    return alpha, beta, ok


def laser_edge_mask(scan: OrganizedScan, params: LaserEdgeParams) -> NDArray[np.bool_]:
    """Per-cell edge flags on the (ring, column) grid."""
    if scan.columns <= 2 * params.k:
        raise InvalidArgumentError(
            f"scan has {scan.columns} columns per ring, needs more than {2 * params.k}"
        )
    ranges = scan.ranges
    a0, b0, ok0 = _side_predicates(ranges, scan.valid, params.k, params.epsilon, -1, params.wrap)
    a1, b1, ok1 = _side_predicates(ranges, scan.valid, params.k, params.epsilon, +1, params.wrap)
    return scan.valid & ok0 & ok1 & ((a0 & b1) | (b0 & a1))


def detect_laser_edges(scan: OrganizedScan, params: LaserEdgeParams | None = None) -> PointCloud:
    """All valid points of the scan, flattened, with near-side edge flags."""
    params = params or LaserEdgeParams()
    mask = laser_edge_mask(scan, params)
    cloud = scan.flatten(mask)
    logger.debug("laser_edges_detected", points=len(cloud), edges=int(mask.sum()))
    return cloud


@dataclass(frozen=True)
class EdgeStats:
    points: int
    edges: int
    per_ring: dict[int, int] = field(default_factory=dict)

    @property
    def fraction(self) -> float:
        return self.edges / self.points if self.points else 0.0


def edge_stats(cloud: PointCloud) -> EdgeStats:
    mask = cloud.edge_mask
    per_ring: dict[int, int] = {}
    if cloud.ring is not None:
        rings, counts = np.unique(cloud.ring[mask], return_counts=True)
        per_ring = {int(r): int(c) for r, c in zip(rings, counts, strict=True)}
    return EdgeStats(points=len(cloud), edges=int(mask.sum()), per_ring=per_ring)
