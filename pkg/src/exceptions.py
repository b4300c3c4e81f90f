"""Custom exception classes for the calibration toolkit.

This module defines a hierarchy of exceptions for better error handling
and more informative error messages throughout the application. Every class
carries the process exit code the CLI reports for it.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from src.geometry.se3 import Pose


class CalibrationError(Exception):
    """Base exception for all calibration-related errors."""

    exit_code: int = 1


# ===== Ingestion (exit 2) =====


class IngestionError(CalibrationError):
    """Exception raised when input data cannot be read or is inconsistent."""

    exit_code = 2


class ParseError(IngestionError):
    """Exception raised when a file does not follow its declared grammar.

    Carries the offending path and 1-based line number.
    """

    def __init__(self, path: str | Path, line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class DataValidationError(IngestionError):
    """Exception raised when parsed data violates a domain invariant.

    This includes NaN coordinates, out-of-range scan indices or size mismatches.
    """

    pass


class MissingFileError(IngestionError):
    """Exception raised when a referenced dataset file does not exist."""

    pass


class ConfigError(IngestionError):
    """Exception raised when configuration is invalid or missing."""

    pass


# ===== Programming / argument errors =====


class InvalidArgumentError(CalibrationError, ValueError):
    """Exception raised for non-finite or out-of-domain arguments."""

    pass


class InvalidPoseError(InvalidArgumentError):
    """Exception raised when a rotation is not orthonormal with det = +1."""

    pass


class DegenerateRotationError(InvalidArgumentError):
    """Exception raised when the rotation axis is ambiguous (angle near pi)."""

    pass


# ===== Geometry signals =====


class BehindCameraError(CalibrationError):
    """Exception raised when a point has non-positive depth in a camera frame."""

    pass


class DegenerateGeometryError(CalibrationError):
    """Exception raised when back-projected rays are (nearly) parallel."""

    pass


class CheiralityError(CalibrationError):
    """Exception raised when a triangulated point lies behind either camera."""

    pass


class OutOfFieldError(CalibrationError):
    """Exception raised when a pixel lies outside the samplable field interior."""

    pass


class EmptyCloudError(CalibrationError):
    """Exception raised when a spatial index is requested over no points."""

    pass


# ===== Degenerate problems (exit 3) =====


class DegenerateProblemError(CalibrationError):
    """Exception raised when an optimization problem has no usable data."""

    exit_code = 3


class NoOverlapError(DegenerateProblemError):
    """Exception raised when no stereo point has a laser neighbour within the gate."""

    pass


class EmptyEdgesError(DegenerateProblemError):
    """Exception raised when an edge map holds no edge pixel."""

    pass


class EmptyViewError(DegenerateProblemError):
    """Exception raised when a synthetic sensor sees no scene surface."""

    pass


class SolverStalledError(DegenerateProblemError):
    """Exception raised when every damped step is rejected.

    The best pose found so far and the partial report are attached so callers
    can still use them.
    """

    def __init__(self, best_pose: Pose, report: Any, message: str = "solver stalled"):
        self.best_pose = best_pose
        self.report = report
        super().__init__(message)


# ===== Initialization (exit 4) =====


class InitializationOutOfRangeError(CalibrationError):
    """Exception raised when no grid candidate yields any inlier edge point."""

    exit_code = 4
