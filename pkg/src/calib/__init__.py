"""Extrinsic calibration: laser to stereo (multi-frame ICP) and thermal to stereo (edge alignment)."""

from src.calib.mficp import (
    FrameCorrespondences,
    IcpFrame,
    IcpParams,
    PointToPointBlock,
    calibrate_laser,
    mficp_correspondences,
    mficp_cost,
)
from src.calib.reae import (
    EdgeProjectionSet,
    InlierSelection,
    ReaeBlock,
    ReaeParams,
    calibrate_thermal,
    outer_cost,
    project_laser_edge,
    project_stereo_edge,
    reae_cost,
    reae_jacobian_row,
    rough_calibrate,
    select_all_inliers,
    select_inliers,
)
from src.calib.result import CalibrationResult, load_result, save_result

__all__ = [
    # MFICP
    "FrameCorrespondences",
    "IcpFrame",
    "IcpParams",
    "PointToPointBlock",
    "calibrate_laser",
    "mficp_correspondences",
    "mficp_cost",
    # REAE
    "EdgeProjectionSet",
    "InlierSelection",
    "ReaeBlock",
    "ReaeParams",
    "calibrate_thermal",
    "outer_cost",
    "project_laser_edge",
    "project_stereo_edge",
    "reae_cost",
    "reae_jacobian_row",
    "rough_calibrate",
    "select_all_inliers",
    "select_inliers",
    # Results
    "CalibrationResult",
    "load_result",
    "save_result",
]
