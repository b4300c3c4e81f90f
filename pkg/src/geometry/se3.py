"""Rigid transforms in SE(3) and their Lie-algebra maps.

Conventions:
    - ``Pose`` maps source-frame coordinates to target-frame coordinates:
      ``p_target = R @ p_source + t``. ``T_SL`` maps laser to stereo,
      ``T_ST`` thermal to stereo, ``T_LR`` right camera to left camera.
    - ``Twist`` is ordered (translation | rotation), matching the column layout
      of the projection Jacobian in :mod:`src.geometry.camera`.
    - Updates use the left perturbation ``T <- exp(delta) @ T``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TypeAlias

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import polar

from src.exceptions import DegenerateRotationError, InvalidArgumentError, InvalidPoseError

Vec3: TypeAlias = NDArray[np.float64]  # shape (3,)
Mat3: TypeAlias = NDArray[np.float64]  # shape (3, 3)
Mat4: TypeAlias = NDArray[np.float64]  # shape (4, 4)
Points: TypeAlias = NDArray[np.float64]  # shape (N, 3)

SMALL_ANGLE = 1e-8
PI_GUARD = 1e-6
# Rotations within ORTHONORMAL_TOL are accepted and stored with drift below DRIFT_TOL.
ORTHONORMAL_TOL = 1e-6
DRIFT_TOL = 1e-10


def hat(v: ArrayLike) -> Mat3:
    """Skew-symmetric matrix such that ``hat(a) @ b == cross(a, b)``."""
    x, y, z = np.asarray(v, dtype=np.float64)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(m: Mat3) -> Vec3:
    """Inverse of :func:`hat`."""
    return np.array([m[2, 1], m[0, 2], m[1, 0]], dtype=np.float64)


def orthonormal_drift(rotation: Mat3) -> float:
    return float(np.linalg.norm(rotation.T @ rotation - np.eye(3), ord="fro"))


def orthonormalize(rotation: Mat3) -> Mat3:
    """Closest rotation in the Frobenius sense (polar decomposition)."""
    u, _ = polar(rotation)
    if np.linalg.det(u) < 0:
        raise InvalidPoseError("matrix is a reflection, not a rotation")
    return u


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform in SE(3)."""

    rotation: Mat3
    translation: Vec3 = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        r = np.array(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.array(self.translation, dtype=np.float64).reshape(3)
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(t))):
            raise InvalidPoseError("pose has non-finite entries")
        if orthonormal_drift(r) > ORTHONORMAL_TOL or abs(np.linalg.det(r) - 1.0) > ORTHONORMAL_TOL:
            raise InvalidPoseError("rotation is not orthonormal with det = +1")
        if orthonormal_drift(r) > DRIFT_TOL:
            r = orthonormalize(r)
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> Pose:
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_translation(cls, translation: ArrayLike) -> Pose:
        return cls(np.eye(3), np.asarray(translation, dtype=np.float64))

    @classmethod
    def from_matrix(cls, matrix: ArrayLike) -> Pose:
        m = np.asarray(matrix, dtype=np.float64)
        if m.shape == (16,):
            m = m.reshape(4, 4)
        if m.shape != (4, 4):
            raise InvalidArgumentError(f"expected a 4x4 matrix, got shape {m.shape}")
        if not np.allclose(m[3], [0.0, 0.0, 0.0, 1.0], atol=1e-12):
            raise InvalidPoseError("last row of a rigid transform must be [0, 0, 0, 1]")
        return cls(m[:3, :3], m[:3, 3])

    def to_matrix(self) -> Mat4:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def compose(self, other: Pose) -> Pose:
        """``self @ other``: apply ``other`` first, then ``self``."""
        return Pose(self.rotation @ other.rotation, self.rotation @ other.translation + self.translation)

    def __matmul__(self, other: Pose) -> Pose:
        return self.compose(other)

    def inverse(self) -> Pose:
        rt = self.rotation.T
        return Pose(rt, -rt @ self.translation)

    def transform_point(self, p: ArrayLike) -> Vec3:
        return self.rotation @ np.asarray(p, dtype=np.float64).reshape(3) + self.translation

    def transform_points(self, points: ArrayLike) -> Points:
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        return pts @ self.rotation.T + self.translation

    def __repr__(self) -> str:
        return f"Pose(rotation={self.rotation.tolist()}, translation={self.translation.tolist()})"


@dataclass(frozen=True, eq=False)
class Twist:
    """Element of se(3): translation part (meters) and axis-angle rotation (radians)."""

    translation: Vec3
    rotation: Vec3

    def __post_init__(self) -> None:
        rho = np.array(self.translation, dtype=np.float64).reshape(3)
        phi = np.array(self.rotation, dtype=np.float64).reshape(3)
        rho.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "translation", rho)
        object.__setattr__(self, "rotation", phi)

    @classmethod
    def zero(cls) -> Twist:
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_vector(cls, xi: ArrayLike) -> Twist:
        v = np.asarray(xi, dtype=np.float64).reshape(6)
        return cls(v[:3], v[3:])

    def as_vector(self) -> NDArray[np.float64]:
        return np.concatenate([self.translation, self.rotation])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_vector()))


def _so3_terms(phi: Vec3) -> tuple[Mat3, Mat3]:
    """Rotation matrix and left Jacobian V for a rotation vector."""
    theta = float(np.linalg.norm(phi))
    k = hat(phi)
    k2 = k @ k
    if theta < SMALL_ANGLE:
        return np.eye(3) + k + 0.5 * k2, np.eye(3) + 0.5 * k + k2 / 6.0
    s, c = np.sin(theta), np.cos(theta)
    rot = np.eye(3) + (s / theta) * k + ((1.0 - c) / theta**2) * k2
    v = np.eye(3) + ((1.0 - c) / theta**2) * k + ((theta - s) / theta**3) * k2
    return rot, v


def exp_map(xi: Twist | ArrayLike) -> Pose:
    """SE(3) exponential of a twist ordered (translation | rotation)."""
    vec = xi.as_vector() if isinstance(xi, Twist) else np.asarray(xi, dtype=np.float64).reshape(6)
    if not np.all(np.isfinite(vec)):
        raise InvalidArgumentError("twist has non-finite components")
    rot, v = _so3_terms(vec[3:])
    return Pose(rot, v @ vec[:3])


def _so3_log(rotation: Mat3) -> Vec3:
    w = 0.5 * vee(rotation - rotation.T)  # sin(theta) * axis
    sin_theta = float(np.linalg.norm(w))
    cos_theta = float(np.clip((np.trace(rotation) - 1.0) / 2.0, -1.0, 1.0))
    theta = float(np.arctan2(sin_theta, cos_theta))
    if np.pi - theta < PI_GUARD:
        raise DegenerateRotationError(f"rotation angle {theta:.9f} is within {PI_GUARD} of pi")
    if theta < SMALL_ANGLE:
        return w * (1.0 + theta**2 / 6.0)
    if theta < 2.5:
        return w * (theta / sin_theta)
    # Near pi the antisymmetric part vanishes; read the axis from the symmetric part.
    b = 0.5 * (rotation + rotation.T) - cos_theta * np.eye(3)
    col = int(np.argmax(np.diag(b)))
    axis = b[:, col] / np.sqrt(b[col, col] * (1.0 - cos_theta))
    axis /= np.linalg.norm(axis)
    if np.dot(axis, w) < 0:
        axis = -axis
    return axis * theta


def log_map(pose: Pose) -> Twist:
    """Canonical twist of a pose, rotation magnitude in [0, pi)."""
    phi = _so3_log(pose.rotation)
    _, v = _so3_terms(phi)
    rho = np.linalg.solve(v, pose.translation)
    return Twist(rho, phi)


def compose(a: Pose, b: Pose) -> Pose:
    return a.compose(b)


def inverse(a: Pose) -> Pose:
    return a.inverse()


def transform_point(a: Pose, p: ArrayLike) -> Vec3:
    return a.transform_point(p)


def rotation_error_deg(estimate: Pose, truth: Pose) -> float:
    """Geodesic angle of ``R_est @ R_gt.T`` in degrees."""
    rel = estimate.rotation @ truth.rotation.T
    cos = np.clip((np.trace(rel) - 1.0) / 2.0, -1.0, 1.0)
    sin = np.linalg.norm(vee(rel - rel.T)) / 2.0
    return float(np.degrees(np.arctan2(sin, cos)))


def translation_error_m(estimate: Pose, truth: Pose) -> float:
    return float(np.linalg.norm(estimate.translation - truth.translation))


def pose_change(new: Pose, old: Pose) -> float:
    """Twist norm of the left increment taking ``old`` to ``new``."""
    return log_map(new @ old.inverse()).norm()
