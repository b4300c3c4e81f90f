"""Synthetic scene description and ray casting against axis-aligned boxes.

World coordinates follow the camera convention (x right, y down, z forward).
Walls are thin boxes.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.geometry import EulerPose, PinholeIntrinsics, Pose

RAY_EPS = 1e-9
# Laser mounting: laser x forward, y left, z up; camera x right, y down, z forward.
LASER_TO_CAMERA = np.array([[0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]])


class Box(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = "box"
    center: tuple[float, float, float]
    size: tuple[float, float, float]
    intensity: int = Field(default=150, ge=0, le=255, description="Gray level in rendered images")

    @field_validator("size")
    @classmethod
    def _positive_size(cls, v: tuple[float, float, float]) -> tuple[float, float, float]:
        if min(v) <= 0:
            raise ValueError("box size must be positive along every axis")
        return v

    @property
    def lo(self) -> NDArray[np.float64]:
        return np.asarray(self.center) - 0.5 * np.asarray(self.size)

    @property
    def hi(self) -> NDArray[np.float64]:
        return np.asarray(self.center) + 0.5 * np.asarray(self.size)


def _default_t_sl() -> EulerPose:
    offset = EulerPose(roll_deg=1.5, pitch_deg=-2.0, yaw_deg=1.0).to_pose().rotation
    return EulerPose.from_pose(Pose(offset @ LASER_TO_CAMERA, np.array([0.05, -0.25, 0.1])))


class SensorRig(BaseModel):
    """True extrinsics, intrinsics and laser geometry of the simulated rig."""

    model_config = ConfigDict(frozen=True)

    k_left: PinholeIntrinsics = PinholeIntrinsics(fx=500, fy=500, cx=320, cy=240, width=640, height=480)
    k_right: PinholeIntrinsics = PinholeIntrinsics(fx=500, fy=500, cx=320, cy=240, width=640, height=480)
    k_thermal: PinholeIntrinsics = PinholeIntrinsics(fx=420, fy=420, cx=320, cy=256, width=640, height=512)
    baseline: float = Field(default=0.2227, gt=0, description="Stereo baseline in meters")
    t_sl: EulerPose = Field(default_factory=_default_t_sl, description="True laser to stereo")
    t_st: EulerPose = EulerPose(x=0.12, y=0.08, z=0.02, roll_deg=1.0, pitch_deg=-0.8, yaw_deg=0.6)
    laser_rings: int = Field(default=128, ge=1)
    laser_columns: int = Field(default=1024, ge=8)
    elevation_min_deg: float = -45.0
    elevation_max_deg: float = 45.0
    laser_max_range: float = Field(default=100.0, gt=0)

    @property
    def t_lr(self) -> Pose:
        """Rectified pair: the right camera sits ``baseline`` along +x of the left camera."""
        return Pose.from_translation([self.baseline, 0.0, 0.0])

    def laser_directions(self) -> NDArray[np.float64]:
        """Unit ray directions (rings, columns, 3) in the laser frame; ring 0 is the highest."""
        el = np.deg2rad(np.linspace(self.elevation_max_deg, self.elevation_min_deg, self.laser_rings))
        az = 2.0 * np.pi * np.arange(self.laser_columns) / self.laser_columns
        ce = np.cos(el)[:, None]
        return np.stack(
            [
                ce * np.cos(az)[None, :],
                ce * np.sin(az)[None, :],
                np.broadcast_to(np.sin(el)[:, None], (len(el), len(az))),
            ],
            axis=-1,
        )


class NoiseSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    laser_sigma: float = Field(default=0.0, ge=0, description="Range noise in meters")
    stereo_sigma: float = Field(default=0.0, ge=0, description="3D feature noise in meters")


class SceneSpec(BaseModel):
    """Boxes, rig, noise and sampling settings. A fixed seed gives byte-identical output."""

    model_config = ConfigDict(frozen=True)

    name: str = "scene"
    boxes: list[Box]
    rig: SensorRig = Field(default_factory=SensorRig)
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    seed: int = 0
    interior_points: int = Field(default=600, ge=0, description="Interior stereo features per frame")
    silhouette_points: int = Field(default=60, ge=0, description="Silhouette stereo features per frame")
    thermal_mode: Literal["edges", "intensity"] = "edges"
    rig_yaw_deg: float = Field(default=12.0, ge=0, description="Per-frame rig yaw spread")
    rig_pitch_deg: float = Field(default=4.0, ge=0)
    rig_shift_m: tuple[float, float, float] = (0.8, 0.2, 0.8)

    @field_validator("boxes")
    @classmethod
    def _has_boxes(cls, v: list[Box]) -> list[Box]:
        if not v:
            raise ValueError("a scene needs at least one box")
        return v


# ===== Ray casting =====


def cast_rays(
    origins: ArrayLike, directions: ArrayLike, boxes: list[Box]
) -> tuple[NDArray[np.float64], NDArray[np.int64]]:
    """Nearest hit distance along each ray and the hit box index (-1 and inf on a miss).

    Rays starting inside a box report that box's exit point.
    """
    d = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    o = np.broadcast_to(np.asarray(origins, dtype=np.float64).reshape(-1, 3), d.shape)
    best_t = np.full(len(d), np.inf)
    best_box = np.full(len(d), -1, dtype=np.int64)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / d
        for index, box in enumerate(boxes):
            t1 = (box.lo - o) * inv
            t2 = (box.hi - o) * inv
            # axis-parallel rays inside the slab give nan; treat them as unbounded
            near = np.where(np.isnan(t1) | np.isnan(t2), -np.inf, np.minimum(t1, t2))
            far = np.where(np.isnan(t1) | np.isnan(t2), np.inf, np.maximum(t1, t2))
            t_enter = near.max(axis=1)
            t_exit = far.min(axis=1)
            hit = (t_exit >= t_enter) & (t_exit > RAY_EPS)
            t = np.where(t_enter > RAY_EPS, t_enter, t_exit)
            closer = hit & (t < best_t)
            best_t[closer] = t[closer]
            best_box[closer] = index
    return best_t, best_box


def visible_from(origin: ArrayLike, points: ArrayLike, boxes: list[Box], rel_tol: float = 1e-7) -> NDArray[np.bool_]:
    """True where nothing is hit strictly before reaching the point."""
    o = np.asarray(origin, dtype=np.float64).reshape(3)
    p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    delta = p - o
    dist = np.linalg.norm(delta, axis=1)
    t, _ = cast_rays(o, delta / dist[:, None], boxes)
    return t >= dist * (1.0 - rel_tol) - rel_tol


def render_labels(boxes: list[Box], t_wc: Pose, k: PinholeIntrinsics) -> NDArray[np.int64]:
    """Index of the first box seen through each pixel centre, -1 for background."""
    vv, uu = np.mgrid[0 : k.height, 0 : k.width]
    rays = k.back_project(np.column_stack([uu.ravel(), vv.ravel()]))
    dirs = rays @ t_wc.rotation.T
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    _, labels = cast_rays(t_wc.translation, dirs, boxes)
    return labels.reshape(k.height, k.width)


def label_intensities(labels: NDArray[np.int64], boxes: list[Box]) -> NDArray[np.uint8]:
    lut = np.array([b.intensity for b in boxes] + [0], dtype=np.uint8)
    return lut[labels]  # -1 indexes the background entry


# ===== Silhouettes =====


def silhouette_edges(box: Box, viewpoint: ArrayLike) -> list[tuple[NDArray[np.float64], NDArray[np.float64]]]:
    """Box edges with exactly one adjacent face turned towards ``viewpoint``."""
    c = np.asarray(viewpoint, dtype=np.float64)
    lo, hi = box.lo, box.hi
    bounds = (lo, hi)

    def front(axis: int, side: int) -> bool:
        return bool(c[axis] > hi[axis]) if side == 1 else bool(c[axis] < lo[axis])

    edges = []
    for axis in range(3):
        b, cc = [a for a in range(3) if a != axis]
        for sb in (0, 1):
            for sc in (0, 1):
                if front(b, sb) == front(cc, sc):
                    continue
                start = np.empty(3)
                start[b] = bounds[sb][b]
                start[cc] = bounds[sc][cc]
                start[axis] = lo[axis]
                end = start.copy()
                end[axis] = hi[axis]
                edges.append((start, end))
    return edges
