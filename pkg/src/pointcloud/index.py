"""Exact nearest-neighbour search over a point cloud.

Wraps :class:`scipy.spatial.cKDTree`. Results are exact and ties are broken by
the lowest stored index, so correspondence sets are reproducible.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial import cKDTree

from src.exceptions import EmptyCloudError
from src.pointcloud.cloud import PointCloud

# Relative slack used to detect candidate ties before exact re-evaluation.
TIE_SLACK = 1e-9


def _squared_distances(points: NDArray[np.float64], q: NDArray[np.float64]) -> NDArray[np.float64]:
    d = points - q
    return np.sum(d * d, axis=-1)


class SpatialIndex:
    """Immutable kd-tree over a cloud's points."""

    def __init__(self, cloud: PointCloud | ArrayLike):
        points = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=np.float64)
        points = np.array(points, dtype=np.float64).reshape(-1, 3)
        if len(points) == 0:
            raise EmptyCloudError("cannot index an empty cloud")
        points.setflags(write=False)
        self._points = points
        self._tree = cKDTree(points)

    @property
    def points(self) -> NDArray[np.float64]:
        return self._points

    def __len__(self) -> int:
        return len(self._points)

    def query(self, queries: ArrayLike) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
        """Nearest stored index and squared distance for each query row."""
        q = np.asarray(queries, dtype=np.float64).reshape(-1, 3)
        if len(q) == 0:
            return np.zeros(0, dtype=np.int64), np.zeros(0)
        k = min(2, len(self._points))
        dist, idx = self._tree.query(q, k=k)
        dist = dist.reshape(len(q), k)
        idx = idx.reshape(len(q), k).astype(np.int64)
        best = idx[:, 0].copy()
        sq = _squared_distances(self._points[best], q)
        if k == 2:
            near_tie = dist[:, 1] <= dist[:, 0] * (1.0 + TIE_SLACK) + 1e-300
            for row in np.flatnonzero(near_tie):
                radius = dist[row, 0] * (1.0 + TIE_SLACK) + 1e-12
                cands = np.asarray(self._tree.query_ball_point(q[row], radius), dtype=np.int64)
                cand_sq = _squared_distances(self._points[cands], q[row])
                tied = cands[cand_sq == cand_sq.min()]
                best[row] = tied.min()
                sq[row] = cand_sq.min()
        return best, sq

    def nearest(self, q: ArrayLike) -> tuple[NDArray[np.float64], float]:
        """Exact nearest stored point and its squared Euclidean distance."""
        idx, sq = self.query(np.asarray(q, dtype=np.float64).reshape(1, 3))
        return self._points[idx[0]].copy(), float(sq[0])


def build_index(cloud: PointCloud) -> SpatialIndex:
    return SpatialIndex(cloud)


def nearest(index: SpatialIndex, q: ArrayLike) -> tuple[NDArray[np.float64], float]:
    return index.nearest(q)
