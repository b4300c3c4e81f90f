"""Point-cloud containers: unordered clouds and ring-organized laser scans."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.exceptions import DataValidationError
from src.geometry.se3 import Pose


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Unordered 3D points with optional per-point edge flags and ring labels.

    ``ring`` is only set for clouds flattened from an :class:`OrganizedScan`.
    """

    points: NDArray[np.float64]
    edges: NDArray[np.bool_] | None = None
    ring: NDArray[np.int64] | None = None

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64).reshape(-1, 3)
        if not np.all(np.isfinite(pts)):
            raise DataValidationError("point cloud holds non-finite coordinates")
        object.__setattr__(self, "points", _readonly(pts))
        if self.edges is not None:
            edges = np.array(self.edges, dtype=bool).reshape(-1)
            if len(edges) != len(pts):
                raise DataValidationError(
                    f"edge flag count {len(edges)} does not match point count {len(pts)}"
                )
            object.__setattr__(self, "edges", _readonly(edges))
        if self.ring is not None:
            ring = np.array(self.ring, dtype=np.int64).reshape(-1)
            if len(ring) != len(pts):
                raise DataValidationError("ring label count does not match point count")
            object.__setattr__(self, "ring", _readonly(ring))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def edge_mask(self) -> NDArray[np.bool_]:
        if self.edges is None:
            return np.zeros(len(self.points), dtype=bool)
        return self.edges

    @property
    def edge_points(self) -> NDArray[np.float64]:
        return self.points[self.edge_mask]

    def with_edges(self, edges: ArrayLike) -> PointCloud:
        return PointCloud(self.points, np.asarray(edges, dtype=bool), self.ring)

    def transformed(self, pose: Pose) -> PointCloud:
        return PointCloud(pose.transform_points(self.points), self.edges, self.ring)

    def subset(self, mask: ArrayLike) -> PointCloud:
        m = np.asarray(mask, dtype=bool)
        return PointCloud(
            self.points[m],
            None if self.edges is None else self.edges[m],
            None if self.ring is None else self.ring[m],
        )


@dataclass(frozen=True, eq=False)
class OrganizedScan:
    """Laser points indexed by (ring, column) with explicit validity flags.

    Columns within a ring follow the azimuth order of the physical scan.
    """

    points: NDArray[np.float64]  # (rings, columns, 3), laser frame
    valid: NDArray[np.bool_]  # (rings, columns)

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64)
        valid = np.array(self.valid, dtype=bool)
        if pts.ndim != 3 or pts.shape[2] != 3:
            raise DataValidationError(f"scan points must be (rings, columns, 3), got {pts.shape}")
        if valid.shape != pts.shape[:2]:
            raise DataValidationError("validity mask shape does not match the scan grid")
        pts[~valid] = 0.0
        if not np.all(np.isfinite(pts[valid])):
            raise DataValidationError("scan holds non-finite coordinates on valid cells")
        if np.any(np.linalg.norm(pts[valid], axis=1) <= 0.0):
            raise DataValidationError("valid scan points must have positive range")
        object.__setattr__(self, "points", _readonly(pts))
        object.__setattr__(self, "valid", _readonly(valid))

    @property
    def rings(self) -> int:
        return self.points.shape[0]

    @property
    def columns(self) -> int:
        return self.points.shape[1]

    @property
    def ranges(self) -> NDArray[np.float64]:
        """Euclidean range per cell; 0 where invalid."""
        return np.linalg.norm(self.points, axis=2)

    def flatten(self, edges: NDArray[np.bool_] | None = None) -> PointCloud:
        """Valid points in row-major (ring, column) order."""
        ring_idx = np.broadcast_to(np.arange(self.rings)[:, None], self.valid.shape)
        return PointCloud(
            self.points[self.valid],
            None if edges is None else np.asarray(edges, dtype=bool)[self.valid],
            ring_idx[self.valid],
        )
