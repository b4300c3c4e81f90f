"""Render synthetic captures of a scene and write them in the dataset layout.

Every frame moves the whole rig to a new random pose in front of the scene.
The laser scan, stereo correspondences and thermal edge map of that frame are
then derived from the same ray-cast geometry and the true extrinsics, so the
calibration pipelines can be checked against exact ground truth.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage
from scipy.spatial.transform import Rotation

from src.core.logging import get_logger
from src.core.performance import measure_time
from src.exceptions import EmptyViewError, InvalidArgumentError
from src.frontend.stereo import CorrespondenceSet, save_matches
from src.geometry import EulerPose, PinholeIntrinsics, Pose, project_points
from src.io.dataset import DatasetManifest, dump_json, frame_entry, save_manifest
from src.io.images import save_png
from src.pointcloud import OrganizedScan, save_scan
from src.synth.perturb import Range, perturb_pose
from src.synth.scene import (
    Box,
    SceneSpec,
    cast_rays,
    label_intensities,
    render_labels,
    silhouette_edges,
    visible_from,
)
from src.types import GroundTruthDict

logger = get_logger(__name__)

GROUND_TRUTH_NAME = "ground_truth.json"
SCENE_NAME = "scene.json"

IMAGE_MARGIN_PX = 5
UNIFORM_WINDOW = 9  # interior features stay 4 px away from any label boundary
MIN_FEATURE_DEPTH = 0.1
RASTER_STEP_PX = 0.4
SILHOUETTE_OVERSAMPLING = 8
SNAP_ITERATIONS = 32

LASER_INIT_OFFSET: tuple[Range, Range] = ((8.0, 12.0), (0.16, 0.24))
THERMAL_INIT_OFFSET: tuple[Range, Range] = ((4.0, 6.0), (0.08, 0.12))


@dataclass(frozen=True, eq=False)
class SyntheticFrame:
    """One rendered capture plus what the generator knows by construction."""

    id: str
    t_ws: Pose  # stereo (left camera) to world
    scan: OrganizedScan
    scan_labels: NDArray[np.int64]  # box hit by each laser cell, -1 for no return
    matches: CorrespondenceSet
    stereo_points: NDArray[np.float64]  # noiseless source points, stereo frame
    stereo_is_edge: NDArray[np.bool_]  # True for silhouette features
    left: NDArray[np.uint8]
    right: NDArray[np.uint8]
    thermal: NDArray[np.uint8]
    thermal_edges: NDArray[np.bool_]


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    spec: SceneSpec
    frames: list[SyntheticFrame]
    init_laser: Pose
    init_thermal: Pose

    @property
    def t_sl(self) -> Pose:
        return self.spec.rig.t_sl.to_pose()

    @property
    def t_st(self) -> Pose:
        return self.spec.rig.t_st.to_pose()

    @property
    def t_lr(self) -> Pose:
        return self.spec.rig.t_lr


@dataclass(eq=False)
class _View:
    """A camera placed in the world, with its rendered label image."""

    k: PinholeIntrinsics
    t_wc: Pose
    boxes: list[Box]
    t_cw: Pose = field(init=False)
    labels: NDArray[np.int64] = field(init=False)
    uniform: NDArray[np.bool_] = field(init=False)

    def __post_init__(self) -> None:
        self.t_cw = self.t_wc.inverse()
        self.labels = render_labels(self.boxes, self.t_wc, self.k)
        hi = ndimage.maximum_filter(self.labels, size=UNIFORM_WINDOW, mode="nearest")
        lo = ndimage.minimum_filter(self.labels, size=UNIFORM_WINDOW, mode="nearest")
        self.uniform = hi == lo

    @property
    def center(self) -> NDArray[np.float64]:
        return self.t_wc.translation

    def project(self, points_w: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
        """Pixels and a mask of points in front and inside the image margin."""
        cam = self.t_cw.transform_points(points_w)
        uv, ok = project_points(self.k, cam)
        ok &= cam[:, 2] > MIN_FEATURE_DEPTH
        m = IMAGE_MARGIN_PX
        with np.errstate(invalid="ignore"):
            ok &= (uv[:, 0] >= m) & (uv[:, 0] <= self.k.width - 1 - m)
            ok &= (uv[:, 1] >= m) & (uv[:, 1] <= self.k.height - 1 - m)
        return uv, ok

    def visible(self, points_w: NDArray[np.float64]) -> NDArray[np.bool_]:
        if len(points_w) == 0:
            return np.zeros(0, dtype=bool)
        return visible_from(self.center, points_w, self.boxes)


def _rig_pose(spec: SceneSpec, rng: np.random.Generator) -> Pose:
    yaw = rng.uniform(-spec.rig_yaw_deg, spec.rig_yaw_deg)
    pitch = rng.uniform(-spec.rig_pitch_deg, spec.rig_pitch_deg)
    shift = rng.uniform(-1.0, 1.0, size=3) * np.asarray(spec.rig_shift_m)
    # y points down, so yaw turns about y
    rotation = Rotation.from_euler("YX", [yaw, pitch], degrees=True).as_matrix()
    return Pose(rotation, shift)


def _lerp_directions(
    d0: NDArray[np.float64], d1: NDArray[np.float64], s: NDArray[np.float64]
) -> NDArray[np.float64]:
    d = (1.0 - s)[:, None] * d0 + s[:, None] * d1
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def _snap_to_silhouettes(
    spec: SceneSpec,
    t_wl: Pose,
    dirs: NDArray[np.float64],
    t: NDArray[np.float64],
    labels: NDArray[np.int64],
) -> NDArray[np.float64]:
    """Turn each near-side discontinuity cell onto the occluding box edge.

    The azimuth between the near cell and its farther neighbour is bisected, so
    the return lies on the outline rather than up to one column step short of it.
    """
    rig = spec.rig
    shape = (rig.laser_rings, rig.laser_columns)
    cells = np.arange(len(dirs)).reshape(shape)
    t_grid = t.reshape(shape)
    l_grid = labels.reshape(shape)
    near, far = [], []
    for step in (-1, 1):
        nbr = np.roll(cells, step, axis=1)
        jump = (l_grid >= 0) & (l_grid != l_grid.ravel()[nbr]) & (t_grid.ravel()[nbr] > t_grid)
        near.append(cells[jump])
        far.append(nbr[jump])
    near_all, far_all = np.concatenate(near), np.concatenate(far)
    near_all, first = np.unique(near_all, return_index=True)
    far_all = far_all[first]
    if len(near_all) == 0:
        return dirs

    d0, d1 = dirs[near_all], dirs[far_all]
    target = labels[near_all]
    lo = np.zeros(len(near_all))
    hi = np.ones(len(near_all))
    for _ in range(SNAP_ITERATIONS):
        mid = 0.5 * (lo + hi)
        rays = _lerp_directions(d0, d1, mid) @ t_wl.rotation.T
        _, hit = cast_rays(t_wl.translation, rays, spec.boxes)
        same = hit == target
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)

    snapped = dirs.copy()
    snapped[near_all] = _lerp_directions(d0, d1, lo)
    return snapped


def _laser_scan(
    spec: SceneSpec, t_wl: Pose, rng: np.random.Generator
) -> tuple[OrganizedScan, NDArray[np.int64], NDArray[np.float64]]:
    """Organized scan, per-cell labels and the noiseless world hit points."""
    rig = spec.rig
    dirs = rig.laser_directions().reshape(-1, 3)
    t, labels = cast_rays(t_wl.translation, dirs @ t_wl.rotation.T, spec.boxes)
    dirs = _snap_to_silhouettes(spec, t_wl, dirs, t, labels)
    dirs_w = dirs @ t_wl.rotation.T
    t, labels = cast_rays(t_wl.translation, dirs_w, spec.boxes)
    valid = np.isfinite(t) & (t <= rig.laser_max_range)
    ranges = np.where(valid, t, 0.0)
    hits_w = t_wl.translation + dirs_w * ranges[:, None]

    noise = rng.normal(0.0, spec.noise.laser_sigma, size=len(ranges))
    measured = np.where(valid, np.maximum(ranges + noise, 1e-3), 0.0)
    shape = (rig.laser_rings, rig.laser_columns)
    scan = OrganizedScan((dirs * measured[:, None]).reshape(*shape, 3), valid.reshape(shape))
    return scan, np.where(valid, labels, -1).reshape(shape), hits_w


def _interior_features(
    spec: SceneSpec,
    hits_w: NDArray[np.float64],
    hit_labels: NDArray[np.int64],
    left: _View,
    right: _View,
    rng: np.random.Generator,
) -> NDArray[np.float64]:
    """Surface points seen by both cameras well inside one box's image region."""
    uv_l, ok_l = left.project(hits_w)
    uv_r, ok_r = right.project(hits_w)
    candidates = np.flatnonzero(ok_l & ok_r)
    for view, uv in ((left, uv_l), (right, uv_r)):
        px = np.rint(uv[candidates]).astype(np.int64)
        same = view.labels[px[:, 1], px[:, 0]] == hit_labels[candidates]
        candidates = candidates[same & view.uniform[px[:, 1], px[:, 0]]]
    pts = hits_w[candidates]
    candidates = candidates[left.visible(pts) & right.visible(pts)]
    if len(candidates) > spec.interior_points:
        candidates = np.sort(rng.choice(candidates, spec.interior_points, replace=False))
    return hits_w[candidates]


def _edge_key(start: NDArray[np.float64], end: NDArray[np.float64]) -> tuple[float, ...]:
    return tuple(np.round(np.concatenate([start, end]), 9).tolist())


def _silhouette_features(
    spec: SceneSpec, left: _View, right: _View, rng: np.random.Generator
) -> NDArray[np.float64]:
    """Points on box edges that are silhouettes from both cameras and visible to both."""
    segments = []
    for box in spec.boxes:
        from_right = {_edge_key(s, e) for s, e in silhouette_edges(box, right.center)}
        segments += [(s, e) for s, e in silhouette_edges(box, left.center) if _edge_key(s, e) in from_right]
    if not segments or spec.silhouette_points == 0:
        return np.zeros((0, 3))

    starts = np.array([s for s, _ in segments])
    spans = np.array([e for _, e in segments]) - starts
    lengths = np.linalg.norm(spans, axis=1)
    n = SILHOUETTE_OVERSAMPLING * spec.silhouette_points
    which = rng.choice(len(segments), size=n, p=lengths / lengths.sum())
    pts = starts[which] + rng.uniform(size=n)[:, None] * spans[which]

    pts = pts[left.project(pts)[1] & right.project(pts)[1]]
    pts = pts[left.visible(pts) & right.visible(pts)]
    if len(pts) > spec.silhouette_points:
        pts = pts[np.sort(rng.choice(len(pts), spec.silhouette_points, replace=False))]
    return pts


def _raster_samples(
    start: NDArray[np.float64], end: NDArray[np.float64], t_cw: Pose, k: PinholeIntrinsics
) -> NDArray[np.float64]:
    """Points along a 3D segment dense enough that projections are < RASTER_STEP_PX apart."""
    n = int(math.ceil(np.linalg.norm(end - start) / 0.01)) + 1
    limit = 4 * max(k.width, k.height)
    for _ in range(5):
        s = np.linspace(0.0, 1.0, max(n, 2))[:, None]
        pts = start + s * (end - start)
        cam = t_cw.transform_points(pts)
        front = cam[:, 2] > MIN_FEATURE_DEPTH
        if not np.any(front):
            return np.zeros((0, 3))
        uv, _ = project_points(k, cam)
        near = front & (np.abs(uv[:, 0] - k.cx) < limit) & (np.abs(uv[:, 1] - k.cy) < limit)
        pair = near[1:] & near[:-1]
        gap = float(np.linalg.norm(np.diff(uv, axis=0)[pair], axis=1).max()) if np.any(pair) else 0.0
        if gap <= RASTER_STEP_PX:
            break
        n = int(math.ceil(n * gap / RASTER_STEP_PX)) + 1
    return pts[front]


def thermal_edge_map(boxes: list[Box], t_wt: Pose, k: PinholeIntrinsics) -> NDArray[np.bool_]:
    """Rasterize the visible silhouette edges seen from the thermal camera as 1-px chains."""
    t_tw = t_wt.inverse()
    center = t_wt.translation
    mask = np.zeros((k.height, k.width), dtype=bool)
    for box in boxes:
        for start, end in silhouette_edges(box, center):
            pts = _raster_samples(start, end, t_tw, k)
            if len(pts) == 0:
                continue
            pts = pts[visible_from(center, pts, boxes)]
            uv, _ = project_points(k, t_tw.transform_points(pts))
            with np.errstate(invalid="ignore"):
                inside = (uv[:, 0] > -0.5) & (uv[:, 0] < k.width - 0.5)
                inside &= (uv[:, 1] > -0.5) & (uv[:, 1] < k.height - 0.5)
            px = np.rint(uv[inside]).astype(np.int64)
            mask[px[:, 1], px[:, 0]] = True
    return mask


def render_frame(spec: SceneSpec, frame_id: str, seed: np.random.SeedSequence) -> SyntheticFrame:
    """Render one capture. Raises EmptyViewError when a sensor sees nothing."""
    rng = np.random.default_rng(seed)
    rig = spec.rig
    t_ws = _rig_pose(spec, rng)
    t_wl = t_ws @ rig.t_sl.to_pose()
    t_wt = t_ws @ rig.t_st.to_pose()

    scan, scan_labels, hits_w = _laser_scan(spec, t_wl, rng)
    if not scan.valid.any():
        raise EmptyViewError(f"frame {frame_id}: the laser sees no surface")

    left = _View(rig.k_left, t_ws, spec.boxes)
    right = _View(rig.k_right, t_ws @ rig.t_lr, spec.boxes)
    if np.all(left.labels < 0) or np.all(right.labels < 0):
        raise EmptyViewError(f"frame {frame_id}: a stereo camera sees no surface")

    flat_labels = scan_labels.ravel()
    valid = flat_labels >= 0
    interior = _interior_features(spec, hits_w[valid], flat_labels[valid], left, right, rng)
    silhouette = _silhouette_features(spec, left, right, rng)
    source_w = np.vstack([interior, silhouette])
    is_edge = np.concatenate([np.zeros(len(interior), bool), np.ones(len(silhouette), bool)])

    observed_w = source_w + rng.normal(0.0, spec.noise.stereo_sigma, size=source_w.shape)
    uv_l, _ = project_points(rig.k_left, left.t_cw.transform_points(observed_w))
    uv_r, _ = project_points(rig.k_right, right.t_cw.transform_points(observed_w))
    keep = np.all(np.isfinite(uv_l), axis=1) & np.all(np.isfinite(uv_r), axis=1)
    keep[keep] = rig.k_left.contains(uv_l[keep]) & rig.k_right.contains(uv_r[keep])
    if not np.any(keep):
        raise EmptyViewError(f"frame {frame_id}: no surface point is visible to both stereo cameras")

    edges = thermal_edge_map(spec.boxes, t_wt, rig.k_thermal)
    if not edges.any():
        raise EmptyViewError(f"frame {frame_id}: the thermal camera sees no silhouette")
    if spec.thermal_mode == "edges":
        thermal = np.where(edges, 255, 0).astype(np.uint8)
    else:
        thermal = label_intensities(render_labels(spec.boxes, t_wt, rig.k_thermal), spec.boxes)

    frame = SyntheticFrame(
        id=frame_id,
        t_ws=t_ws,
        scan=scan,
        scan_labels=scan_labels,
        matches=CorrespondenceSet(uv_l[keep], uv_r[keep]),
        stereo_points=left.t_cw.transform_points(source_w[keep]),
        stereo_is_edge=is_edge[keep],
        left=label_intensities(left.labels, spec.boxes),
        right=label_intensities(right.labels, spec.boxes),
        thermal=thermal,
        thermal_edges=edges,
    )
    logger.info(
        "synth_frame",
        frame=frame_id,
        laser_points=int(scan.valid.sum()),
        features=len(frame.matches),
        silhouette_features=int(frame.stereo_is_edge.sum()),
        thermal_edge_pixels=int(edges.sum()),
    )
    return frame


def frame_ids(n_frames: int) -> list[str]:
    width = max(4, len(str(n_frames - 1)))
    return [f"{i:0{width}d}" for i in range(n_frames)]


def simulate(
    spec: SceneSpec,
    n_frames: int,
    workers: int = 1,
    laser_offset: tuple[Range, Range] = LASER_INIT_OFFSET,
    thermal_offset: tuple[Range, Range] = THERMAL_INIT_OFFSET,
) -> SyntheticDataset:
    """Render ``n_frames`` captures in memory.

    Each frame draws from its own child of the scene seed, so the output does
    not depend on ``workers``.
    """
    if n_frames < 1:
        raise InvalidArgumentError(f"n_frames must be at least 1, got {n_frames}")
    init_seq, frames_seq = np.random.SeedSequence(spec.seed).spawn(2)
    laser_seq, thermal_seq = init_seq.spawn(2)
    jobs = list(zip(frame_ids(n_frames), frames_seq.spawn(n_frames), strict=True))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        frames = list(pool.map(lambda job: render_frame(spec, *job), jobs))

    return SyntheticDataset(
        spec=spec,
        frames=frames,
        init_laser=perturb_pose(spec.rig.t_sl.to_pose(), *laser_offset, seed=laser_seq),
        init_thermal=perturb_pose(spec.rig.t_st.to_pose(), *thermal_offset, seed=thermal_seq),
    )


def _matrix(pose: Pose) -> list[float]:
    return [float(v) for v in pose.to_matrix().ravel()]


def write_dataset(data: SyntheticDataset, out_dir: Path | str) -> Path:
    """Write frames, ``manifest.json``, ``ground_truth.json`` and ``scene.json``."""
    root = Path(out_dir)
    rig = data.spec.rig
    entries = []
    for frame in data.frames:
        entry = frame_entry(frame.id)
        save_png(frame.left, root / entry.left)
        save_png(frame.right, root / entry.right)
        save_png(frame.thermal, root / entry.thermal)
        save_scan(frame.scan, root / entry.laser)
        save_matches(frame.matches, root / entry.matches)  # type: ignore[operator]
        entries.append(entry)

    manifest = DatasetManifest(
        k_left=rig.k_left,
        k_right=rig.k_right,
        k_thermal=rig.k_thermal,
        t_lr=EulerPose.from_pose(rig.t_lr),
        laser_rings=rig.laser_rings,
        laser_columns=rig.laser_columns,
        laser_wrap=True,
        thermal_is_edge_map=data.spec.thermal_mode == "edges",
        init_laser=EulerPose.from_pose(data.init_laser),
        init_thermal=EulerPose.from_pose(data.init_thermal),
        frames=entries,
    )
    save_manifest(manifest, root)

    truth: GroundTruthDict = {
        "T_SL": _matrix(data.t_sl),
        "T_ST": _matrix(data.t_st),
        "T_LR": _matrix(data.t_lr),
        "seed": data.spec.seed,
        "scene": data.spec.name,
        "rig_poses": {f.id: _matrix(f.t_ws) for f in data.frames},
    }
    dump_json(truth, root / GROUND_TRUTH_NAME)
    dump_json(data.spec.model_dump(mode="json"), root / SCENE_NAME)
    return root


@measure_time
def generate(
    spec: SceneSpec,
    n_frames: int,
    out_dir: Path | str,
    workers: int = 1,
    laser_offset: tuple[Range, Range] = LASER_INIT_OFFSET,
    thermal_offset: tuple[Range, Range] = THERMAL_INIT_OFFSET,
) -> SyntheticDataset:
    """Render ``n_frames`` captures of ``spec`` and write them under ``out_dir``."""
    data = simulate(spec, n_frames, workers, laser_offset, thermal_offset)
    write_dataset(data, out_dir)
    logger.info("synth_dataset_written", root=str(out_dir), scene=spec.name, frames=n_frames)
    return data
