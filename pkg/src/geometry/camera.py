"""Pinhole camera model, projection and its analytic Jacobian.

Lens distortion is assumed calibrated away; all cameras are ideal pinholes.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.exceptions import BehindCameraError

MIN_DEPTH = 1e-9


class PinholeIntrinsics(BaseModel):
    """Focal lengths, principal point and image size, all in pixels."""

    model_config = ConfigDict(frozen=True)

    fx: float = Field(gt=0, allow_inf_nan=False)
    fy: float = Field(gt=0, allow_inf_nan=False)
    cx: float = Field(gt=0, allow_inf_nan=False)
    cy: float = Field(gt=0, allow_inf_nan=False)
    width: int = Field(gt=0)
    height: int = Field(gt=0)

    @model_validator(mode="after")
    def _principal_point_inside(self) -> PinholeIntrinsics:
        if not (self.cx < self.width and self.cy < self.height):
            raise ValueError("principal point must lie inside the image")
        return self

    @property
    def matrix(self) -> NDArray[np.float64]:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    def back_project(self, uv: ArrayLike) -> NDArray[np.float64]:
        """Ray directions (z = 1) through pixels, shape (N, 3)."""
        px = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
        x = (px[:, 0] - self.cx) / self.fx
        y = (px[:, 1] - self.cy) / self.fy
        return np.column_stack([x, y, np.ones(len(px))])

    def contains(self, uv: ArrayLike) -> NDArray[np.bool_]:
        px = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
        return (
            (px[:, 0] >= 0) & (px[:, 0] <= self.width - 1) & (px[:, 1] >= 0) & (px[:, 1] <= self.height - 1)
        )


def project(k: PinholeIntrinsics, p_cam: ArrayLike) -> NDArray[np.float64]:
    """Pixel (u, v) of a camera-frame point; may fall outside the image."""
    x, y, z = np.asarray(p_cam, dtype=np.float64).reshape(3)
    if z <= MIN_DEPTH:
        raise BehindCameraError(f"point depth {z} is not in front of the camera")
    return np.array([k.fx * x / z + k.cx, k.fy * y / z + k.cy])


def project_points(
    k: PinholeIntrinsics, points: ArrayLike
) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
    """Batch projection. Returns pixels (N, 2) and the in-front mask; invalid rows are NaN."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    valid = pts[:, 2] > MIN_DEPTH
    uv = np.full((len(pts), 2), np.nan)
    z = pts[valid, 2]
    uv[valid, 0] = k.fx * pts[valid, 0] / z + k.cx
    uv[valid, 1] = k.fy * pts[valid, 1] / z + k.cy
    return uv, valid


def projection_jacobian(k: PinholeIntrinsics, p_cam: ArrayLike) -> NDArray[np.float64]:
    """d(u, v)/d(delta) for a left perturbation of the transform producing ``p_cam``.

    Columns follow the twist ordering (translation | rotation).
    """
    p = np.asarray(p_cam, dtype=np.float64).reshape(3)
    if p[2] <= MIN_DEPTH:
        raise BehindCameraError(f"point depth {p[2]} is not in front of the camera")
    return projection_jacobians(k, p[None, :])[0]


def projection_jacobians(k: PinholeIntrinsics, points: ArrayLike) -> NDArray[np.float64]:
    """Batch form of :func:`projection_jacobian`, shape (N, 2, 6). Depths must be positive."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    fx, fy = k.fx, k.fy
    z2 = z * z
    jac = np.zeros((len(pts), 2, 6))
    jac[:, 0, 0] = fx / z
    jac[:, 0, 2] = -fx * x / z2
    jac[:, 0, 3] = -fx * x * y / z2
    jac[:, 0, 4] = fx + fx * x * x / z2
    jac[:, 0, 5] = -fx * y / z
    jac[:, 1, 1] = fy / z
    jac[:, 1, 2] = -fy * y / z2
    jac[:, 1, 3] = -fy - fy * y * y / z2
    jac[:, 1, 4] = fy * x * y / z2
    jac[:, 1, 5] = fy * x / z
    return jac
