"""Human-facing {x, y, z, roll, pitch, yaw} pose form.

Angles are degrees and follow the intrinsic Z-Y-X convention:
``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``.
"""

from __future__ import annotations

import warnings
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial.transform import Rotation

from src.geometry.se3 import Pose

GIMBAL_MARGIN_DEG = 1.0


class EulerPose(BaseModel):
    """Translation in meters plus roll/pitch/yaw in degrees."""

    model_config = ConfigDict(frozen=True)

    x: float = Field(default=0.0, allow_inf_nan=False)
    y: float = Field(default=0.0, allow_inf_nan=False)
    z: float = Field(default=0.0, allow_inf_nan=False)
    roll_deg: float = Field(default=0.0, allow_inf_nan=False)
    pitch_deg: float = Field(default=0.0, allow_inf_nan=False)
    yaw_deg: float = Field(default=0.0, allow_inf_nan=False)

    @classmethod
    def from_pose(cls, pose: Pose) -> EulerPose:
        with warnings.catch_warnings():
            # scipy warns at gimbal lock; the angles are still a valid decomposition
            warnings.simplefilter("ignore", UserWarning)
            yaw, pitch, roll = Rotation.from_matrix(pose.rotation).as_euler("ZYX", degrees=True)
        x, y, z = pose.translation
        return cls(
            x=float(x),
            y=float(y),
            z=float(z),
            roll_deg=float(roll),
            pitch_deg=float(pitch),
            yaw_deg=float(yaw),
        )

    @classmethod
    def from_values(cls, values: Any) -> EulerPose:
        """Build from a 6-sequence ``x, y, z, roll, pitch, yaw`` or a ``"a,b,c,d,e,f"`` string."""
        if isinstance(values, str):
            values = [float(v) for v in values.split(",")]
        x, y, z, roll, pitch, yaw = (float(v) for v in values)
        return cls(x=x, y=y, z=z, roll_deg=roll, pitch_deg=pitch, yaw_deg=yaw)

    def to_pose(self) -> Pose:
        rot = Rotation.from_euler(
            "ZYX", [self.yaw_deg, self.pitch_deg, self.roll_deg], degrees=True
        ).as_matrix()
        return Pose(rot, np.array([self.x, self.y, self.z]))

    def near_gimbal_lock(self) -> bool:
        return abs(abs(self.pitch_deg) - 90.0) < GIMBAL_MARGIN_DEG

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.x, self.y, self.z, self.roll_deg, self.pitch_deg, self.yaw_deg)
