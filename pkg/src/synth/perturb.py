"""Random initial guesses around a known pose."""

from __future__ import annotations

import numpy as np
from scipy.spatial.transform import Rotation

from src.exceptions import InvalidArgumentError
from src.geometry import Pose

Range = tuple[float, float]


def _check_range(name: str, bounds: Range) -> None:
    low, high = bounds
    if not 0.0 <= low <= high:
        raise InvalidArgumentError(f"{name} must satisfy 0 <= min <= max, got {bounds}")


def _unit_vector(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.normal(size=3)
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            return v / norm


def perturb_pose(
    t: Pose,
    rot_range: Range,
    trans_range: Range,
    seed: int | np.random.SeedSequence,
) -> Pose:
    """Offset ``t`` by a random rotation and translation.

    The rotation offset has a uniformly random axis and an angle drawn from
    ``rot_range`` degrees; the translation offset a uniformly random direction
    and a length drawn from ``trans_range`` meters. A zero range leaves that
    part untouched.
    """
    _check_range("rot_range", rot_range)
    _check_range("trans_range", trans_range)
    rng = np.random.default_rng(seed)

    axis = _unit_vector(rng)
    angle = np.deg2rad(rng.uniform(*rot_range))
    direction = _unit_vector(rng)
    length = rng.uniform(*trans_range)

    rotation = t.rotation if angle == 0.0 else Rotation.from_rotvec(axis * angle).as_matrix() @ t.rotation
    translation = t.translation if length == 0.0 else t.translation + direction * length
    return Pose(rotation, translation)
