"""SE(3) poses, Euler I/O form and the pinhole camera model."""

from .camera import (
    PinholeIntrinsics,
    project,
    project_points,
    projection_jacobian,
    projection_jacobians,
)
from .euler import EulerPose
from .se3 import (
    Pose,
    Twist,
    compose,
    exp_map,
    hat,
    inverse,
    log_map,
    orthonormalize,
    pose_change,
    rotation_error_deg,
    transform_point,
    translation_error_m,
    vee,
)

__all__ = [
    # Camera
    "PinholeIntrinsics",
    "project",
    "project_points",
    "projection_jacobian",
    "projection_jacobians",
    # Euler form
    "EulerPose",
    # SE(3)
    "Pose",
    "Twist",
    "compose",
    "exp_map",
    "hat",
    "inverse",
    "log_map",
    "orthonormalize",
    "pose_change",
    "rotation_error_deg",
    "transform_point",
    "translation_error_m",
    "vee",
]
