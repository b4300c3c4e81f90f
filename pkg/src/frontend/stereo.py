"""Stereo frontend: triangulate matched pixels and tag edge points via Sobel maps.

Feature matching happens upstream; this module ingests ``(left, right)`` pixel
pairs and produces the per-frame stereo cloud in the left-camera frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import ndimage

from src.core.logging import get_logger
from src.exceptions import (
    CheiralityError,
    DataValidationError,
    DegenerateGeometryError,
    MissingFileError,
    ParseError,
)
from src.geometry import PinholeIntrinsics, Pose
from src.pointcloud import PointCloud

logger = get_logger(__name__)

EdgeMap = NDArray[np.bool_]

MIN_TRIANGULATION_ANGLE = 1e-4
MATCHES_HEADER = ["ul", "vl", "ur", "vr"]


@dataclass(frozen=True, eq=False)
class CorrespondenceSet:
    """Matched subpixel positions, row ``i`` of ``left`` pairs with row ``i`` of ``right``."""

    left: NDArray[np.float64]
    right: NDArray[np.float64]

    def __post_init__(self) -> None:
        left = np.array(self.left, dtype=np.float64).reshape(-1, 2)
        right = np.array(self.right, dtype=np.float64).reshape(-1, 2)
        if len(left) != len(right):
            raise DataValidationError("left and right correspondence counts differ")
        if not (np.all(np.isfinite(left)) and np.all(np.isfinite(right))):
            raise DataValidationError("correspondences hold non-finite pixels")
        left.setflags(write=False)
        right.setflags(write=False)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    def __len__(self) -> int:
        return len(self.left)

    def subset(self, mask: ArrayLike) -> CorrespondenceSet:
        m = np.asarray(mask)
        return CorrespondenceSet(self.left[m], self.right[m])

    def check_bounds(self, k_left: PinholeIntrinsics, k_right: PinholeIntrinsics) -> None:
        bad_left = ~k_left.contains(self.left)
        bad_right = ~k_right.contains(self.right)
        if np.any(bad_left) or np.any(bad_right):
            row = int(np.flatnonzero(bad_left | bad_right)[0])
            raise DataValidationError(f"correspondence {row} lies outside its image")


def load_matches(path: Path | str) -> CorrespondenceSet:
    """Read a ``ul,vl,ur,vr`` CSV."""
    path = Path(path)
    if not path.exists():
        raise MissingFileError(f"matches file not found: {path}")
    rows: list[list[float]] = []
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if [c.strip() for c in header.split(",")] != MATCHES_HEADER:
            raise ParseError(path, 1, f"expected header 'ul,vl,ur,vr', got {header!r}")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            tokens = line.split(",")
            if len(tokens) != 4:
                raise ParseError(path, lineno, f"expected 4 fields, got {len(tokens)}")
            try:
                rows.append([float(t) for t in tokens])
            except ValueError:
                raise ParseError(path, lineno, f"non-numeric value in {line!r}") from None
    data = np.array(rows).reshape(-1, 4)
    return CorrespondenceSet(data[:, :2], data[:, 2:])


def save_matches(matches: CorrespondenceSet, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(MATCHES_HEADER)]
    for (ul, vl), (ur, vr) in zip(matches.left, matches.right, strict=True):
        lines.append(f"{ul:.12g},{vl:.12g},{ur:.12g},{vr:.12g}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ===== Triangulation =====


def _rays(
    left_px: NDArray[np.float64],
    right_px: NDArray[np.float64],
    k_left: PinholeIntrinsics,
    k_right: PinholeIntrinsics,
    t_lr: Pose,
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    d1 = k_left.back_project(left_px)
    d2 = k_right.back_project(right_px) @ t_lr.rotation.T
    d1 /= np.linalg.norm(d1, axis=1, keepdims=True)
    d2 /= np.linalg.norm(d2, axis=1, keepdims=True)
    return d1, d2, np.asarray(t_lr.translation)


def _midpoints(
    d1: NDArray[np.float64], d2: NDArray[np.float64], origin2: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """Closest-approach parameters ``s, t`` and midpoints for rays ``s*d1`` and ``origin2 + t*d2``."""
    w0 = -origin2
    b = np.sum(d1 * d2, axis=1)
    d = d1 @ w0
    e = d2 @ w0
    denom = 1.0 - b * b
    angle = np.arccos(np.clip(b, -1.0, 1.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (b * e - d) / denom
        t = (e - b * d) / denom
    mid = 0.5 * (s[:, None] * d1 + origin2 + t[:, None] * d2)
    return s, t, angle, mid


def triangulate(
    left_px: ArrayLike,
    right_px: ArrayLike,
    k_left: PinholeIntrinsics,
    k_right: PinholeIntrinsics,
    t_lr: Pose,
    min_angle: float = MIN_TRIANGULATION_ANGLE,
) -> NDArray[np.float64]:
    """Midpoint of the common perpendicular of the two viewing rays, left-camera frame.

    ``t_lr`` maps right-camera coordinates into the left camera.
    """
    lp = np.asarray(left_px, dtype=np.float64).reshape(1, 2)
    rp = np.asarray(right_px, dtype=np.float64).reshape(1, 2)
    d1, d2, o2 = _rays(lp, rp, k_left, k_right, t_lr)
    s, t, angle, mid = _midpoints(d1, d2, o2)
    if angle[0] < min_angle:
        raise DegenerateGeometryError(
            f"triangulation angle {angle[0]:.3g} rad is below {min_angle:.3g} rad"
        )
    if s[0] <= 0 or t[0] <= 0:
        raise CheiralityError("triangulated point lies behind a camera")
    return mid[0]


@dataclass(frozen=True)
class TriangulationResult:
    cloud: PointCloud
    matches: CorrespondenceSet
    dropped_parallax: int
    dropped_cheirality: int
    dropped_depth: int


def triangulate_frame(
    matches: CorrespondenceSet,
    k_left: PinholeIntrinsics,
    k_right: PinholeIntrinsics,
    t_lr: Pose,
    min_angle: float = MIN_TRIANGULATION_ANGLE,
    max_depth: float = 80.0,
) -> TriangulationResult:
    """Triangulate every pair, dropping low-parallax, behind-camera and too-far points."""
    if len(matches) == 0:
        return TriangulationResult(PointCloud(np.zeros((0, 3))), matches, 0, 0, 0)
    d1, d2, o2 = _rays(matches.left, matches.right, k_left, k_right, t_lr)
    s, t, angle, mid = _midpoints(d1, d2, o2)

    parallax_ok = angle >= min_angle
    front_ok = parallax_ok & (s > 0) & (t > 0)
    depth_ok = front_ok & (mid[:, 2] <= max_depth)
    result = TriangulationResult(
        cloud=PointCloud(mid[depth_ok]),
        matches=matches.subset(depth_ok),
        dropped_parallax=int(np.count_nonzero(~parallax_ok)),
        dropped_cheirality=int(np.count_nonzero(parallax_ok & ~front_ok)),
        dropped_depth=int(np.count_nonzero(front_ok & ~depth_ok)),
    )
    logger.debug(
        "stereo_triangulated",
        kept=len(result.cloud),
        dropped_parallax=result.dropped_parallax,
        dropped_cheirality=result.dropped_cheirality,
        dropped_depth=result.dropped_depth,
    )
    return result


# ===== Edge tagging =====


def sobel_magnitude(image: ArrayLike) -> NDArray[np.float64]:
    img = np.asarray(image, dtype=np.float64)
    gx = ndimage.sobel(img, axis=1)
    gy = ndimage.sobel(img, axis=0)
    return np.hypot(gx, gy)


def sobel_edges(image: ArrayLike, magnitude_threshold: float) -> EdgeMap:
    """Pixels whose 3x3 Sobel gradient magnitude reaches the threshold; borders excluded."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or min(img.shape) < 3:
        raise DataValidationError(f"sobel needs a 2D image of at least 3x3, got {img.shape}")
    edges = sobel_magnitude(img) >= magnitude_threshold
    edges[0, :] = edges[-1, :] = False
    edges[:, 0] = edges[:, -1] = False
    return edges


def _near_edge(px: NDArray[np.float64], edges: EdgeMap, tolerance: int) -> NDArray[np.bool_]:
    grown = (
        ndimage.binary_dilation(edges, structure=np.ones((3, 3), dtype=bool), iterations=tolerance)
        if tolerance > 0 and edges.any()
        else edges
    )
    cols = np.rint(px[:, 0]).astype(np.int64)
    rows = np.rint(px[:, 1]).astype(np.int64)
    h, w = edges.shape
    inside = (cols >= 0) & (cols < w) & (rows >= 0) & (rows < h)
    hit = np.zeros(len(px), dtype=bool)
    hit[inside] = grown[rows[inside], cols[inside]]
    return hit


def tag_stereo_edge_points(
    correspondences: CorrespondenceSet,
    left_edges: EdgeMap,
    right_edges: EdgeMap,
    cloud: PointCloud,
    tolerance: int = 1,
) -> PointCloud:
    """Flag points whose pixels sit within ``tolerance`` (Chebyshev) of an edge in BOTH views."""
    if len(correspondences) != len(cloud):
        raise DataValidationError(
            f"{len(correspondences)} correspondences for {len(cloud)} cloud points"
        )
    flags = _near_edge(correspondences.left, np.asarray(left_edges, dtype=bool), tolerance)
    flags &= _near_edge(correspondences.right, np.asarray(right_edges, dtype=bool), tolerance)
    return cloud.with_edges(flags)
