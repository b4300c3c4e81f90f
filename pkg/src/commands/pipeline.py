"""Per-frame sensor pipelines shared by the calibration and overlay commands."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from src.calib import EdgeProjectionSet, IcpFrame
from src.config import Settings
from src.core.logging import frame_context, get_logger
from src.exceptions import DataValidationError, EmptyEdgesError, MissingFileError
from src.frontend import (
    EdgeMap,
    build_attraction_field,
    canny,
    detect_laser_edges,
    filter_edges,
    sobel_edges,
    tag_stereo_edge_points,
    triangulate_frame,
)
from src.geometry import PinholeIntrinsics, Pose
from src.io import Dataset, FrameData, load_frame
from src.pointcloud import PointCloud

logger = get_logger(__name__)

EDGE_MAP_LEVEL = 127


def _check_size(frame_id: str, name: str, image: np.ndarray, k: PinholeIntrinsics) -> None:
    if image.shape != (k.height, k.width):
        raise DataValidationError(
            f"frame {frame_id}: {name} image is {image.shape[1]}x{image.shape[0]}, "
            f"intrinsics say {k.width}x{k.height}"
        )


def load_frames(dataset: Dataset, require_matches: bool = False) -> list[FrameData]:
    return [load_frame(dataset, fid, require_matches) for fid in dataset.manifest.frame_ids]


def stereo_cloud(dataset: Dataset, frame: FrameData, settings: Settings) -> PointCloud:
    """Triangulated correspondences with Sobel edge flags, in the stereo frame."""
    manifest = dataset.manifest
    if frame.matches is None:
        raise MissingFileError(f"frame {frame.id}: no stereo correspondences")
    _check_size(frame.id, "left", frame.left, manifest.k_left)
    _check_size(frame.id, "right", frame.right, manifest.k_right)
    frame.matches.check_bounds(manifest.k_left, manifest.k_right)

    cfg = settings.stereo
    tri = triangulate_frame(
        frame.matches,
        manifest.k_left,
        manifest.k_right,
        dataset.t_lr,
        min_angle=cfg.min_parallax_rad,
        max_depth=cfg.max_depth,
    )
    left_edges = sobel_edges(frame.left, cfg.sobel_threshold)
    right_edges = sobel_edges(frame.right, cfg.sobel_threshold)
    cloud = tag_stereo_edge_points(tri.matches, left_edges, right_edges, tri.cloud, cfg.edge_tolerance_px)
    logger.info("stereo_cloud", points=len(cloud), edge_points=int(cloud.edge_mask.sum()))
    return cloud


def laser_cloud(dataset: Dataset, frame: FrameData, settings: Settings) -> PointCloud:
    """All valid laser points (laser frame) with depth-discontinuity flags."""
    params = settings.laser_edges.model_copy(
        update={"wrap": settings.laser_edges.wrap and dataset.manifest.laser_wrap}
    )
    cloud = detect_laser_edges(frame.scan, params)
    logger.info("laser_cloud", points=len(cloud), edge_points=int(cloud.edge_mask.sum()))
    return cloud


def thermal_edges(dataset: Dataset, frame: FrameData, settings: Settings) -> EdgeMap:
    """Canny (unless the image already is an edge map) followed by the length/clutter filter."""
    _check_size(frame.id, "thermal", frame.thermal, dataset.manifest.k_thermal)
    cfg = settings.thermal_edges
    if dataset.manifest.thermal_is_edge_map:
        raw = frame.thermal > EDGE_MAP_LEVEL
    else:
        raw = canny(frame.thermal, cfg)
    return filter_edges(raw, cfg.min_length, cfg.cluttered_fill_ratio, cfg.remove_cluttered)


def icp_frames(dataset: Dataset, frames: Sequence[FrameData], settings: Settings) -> list[IcpFrame]:
    built = []
    for frame in frames:
        with frame_context(frame.id):
            built.append(
                IcpFrame.build(
                    frame.id,
                    stereo_cloud(dataset, frame, settings),
                    laser_cloud(dataset, frame, settings),
                )
            )
    return built


def edge_sets(
    dataset: Dataset, frames: Sequence[FrameData], t_sl: Pose, settings: Settings
) -> list[EdgeProjectionSet]:
    """Edge bundles of every frame whose thermal image holds edges; blank frames are skipped."""
    sets = []
    for frame in frames:
        with frame_context(frame.id):
            edges = thermal_edges(dataset, frame, settings)
            if not edges.any():
                logger.warning("thermal_frame_skipped", reason="no thermal edge pixel")
                continue
            sets.append(
                EdgeProjectionSet(
                    id=frame.id,
                    stereo_edges=stereo_cloud(dataset, frame, settings).edge_points,
                    laser_edges=laser_cloud(dataset, frame, settings).edge_points,
                    field=build_attraction_field(edges),
                    k=dataset.manifest.k_thermal,
                    t_sl=t_sl,
                )
            )
    if not sets:
        raise EmptyEdgesError("no frame has any thermal edge")
    return sets
