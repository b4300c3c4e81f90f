"""Point clouds, organized laser scans, nearest-neighbour search and file I/O."""

from src.pointcloud.cloud import OrganizedScan, PointCloud
from src.pointcloud.index import SpatialIndex, build_index, nearest
from src.pointcloud.io import load_cloud, load_scan, save_cloud, save_scan

__all__ = [
    "OrganizedScan",
    "PointCloud",
    "SpatialIndex",
    "build_index",
    "load_cloud",
    "load_scan",
    "nearest",
    "save_cloud",
    "save_scan",
]
