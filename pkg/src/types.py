"""Type definitions for the calibration toolkit's JSON documents.

This module contains TypedDict definitions for the files the CLI reads and
writes, for improved type safety and better IDE support.
"""

from typing import TypedDict


class PoseDict(TypedDict):
    """Human-facing pose: meters and degrees (intrinsic Z-Y-X)."""

    x: float
    y: float
    z: float
    roll_deg: float
    pitch_deg: float
    yaw_deg: float


class CalibrationResultDict(TypedDict):
    """Contents of ``laser_calib.json`` / ``thermal_calib.json``."""

    target: str  # "T_SL" or "T_ST"
    pose: PoseDict
    matrix: list[float]  # 16 values, row-major
    init: PoseDict | None
    trace: list[float]  # Outer cost per iteration
    solve_traces: list[list[float]]  # Accepted-step costs of every solve
    counts: dict[str, int]  # Correspondences / inliers per frame id
    frame_residuals: dict[str, float]  # Mean residual per frame id
    iterations: int
    termination: str
    params: dict


class ErrorDict(TypedDict):
    rotation_deg: float
    translation_cm: float


class EvalReportDict(TypedDict):
    """Contents of ``eval_report.json``."""

    target: str
    result: ErrorDict
    init: ErrorDict | None


class GroundTruthDict(TypedDict):
    """Contents of a synthetic dataset's ``ground_truth.json``."""

    T_SL: list[float]
    T_ST: list[float]
    T_LR: list[float]
    seed: int
    scene: str
    rig_poses: dict[str, list[float]]  # Stereo-to-world per frame id


class OverlayReportDict(TypedDict):
    """JSON side-car written next to an overlay PNG."""

    frame: str
    mode: str
    marks: int
    near_edge_fraction: float  # Over edge-point marks only
    layers: dict[str, int]  # Marks per point source
