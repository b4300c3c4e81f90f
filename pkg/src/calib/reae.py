"""Thermal extrinsic calibration by aligning projected 3D edges with thermal edges.

Stereo edge points (stereo frame) and laser edge points (laser frame, moved to
the stereo frame with ``T_SL``) are projected into the thermal image, and the
attraction field value at each projection is the residual. Inlier points are
frozen per outer iteration and re-selected after every solve.

The solver works on ``T_TS = T_ST^-1`` (stereo to thermal) so the projection
Jacobian applies directly to the transformed point. Results are reported as
``T_ST``.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.spatial.transform import Rotation

from src.calib.result import CalibrationResult
from src.core.logging import get_logger
from src.core.performance import PerformanceMonitor, measure_time
from src.exceptions import (
    DegenerateProblemError,
    InitializationOutOfRangeError,
    InvalidArgumentError,
    SolverStalledError,
)
from src.frontend.thermal_edges import AttractionField
from src.geometry import PinholeIntrinsics, Pose, pose_change, project, projection_jacobians
from src.geometry.camera import MIN_DEPTH, project_points
from src.optim import ResidualBlock, SolveOptions, SolveReport, solve

logger = get_logger(__name__)


class ReaeParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    inlier_threshold: float = Field(default=10.0, ge=0, description="Field value cutoff in pixels")
    max_outer_iterations: int = Field(default=30, gt=0)
    rotation_grid_deg: float = Field(default=1.0, gt=0)
    rotation_half_range_deg: float = Field(default=6.0, ge=0)
    translation_grid_m: float = Field(default=0.04, gt=0)
    translation_half_range_m: float = Field(default=0.12, ge=0)
    rough_calibration: bool = Field(default=True, description="Grid search before refinement")
    pose_tolerance: float = Field(default=1e-6, gt=0, description="Twist norm of a pose update")
    cost_tolerance: float = Field(default=1e-8, gt=0, description="Relative cost decrease")

    @model_validator(mode="after")
    def _ranges_cover_grid(self) -> ReaeParams:
        if self.rotation_half_range_deg < self.rotation_grid_deg:
            raise ValueError("rotation_half_range_deg must be at least rotation_grid_deg")
        if self.translation_half_range_m < self.translation_grid_m:
            raise ValueError("translation_half_range_m must be at least translation_grid_m")
        return self


@dataclass(frozen=True, eq=False)
class EdgeProjectionSet:
    """One frame's edge points, thermal field and thermal intrinsics."""

    id: str
    stereo_edges: NDArray[np.float64]  # stereo frame
    laser_edges: NDArray[np.float64]  # laser frame
    field: AttractionField
    k: PinholeIntrinsics
    t_sl: Pose

    def __post_init__(self) -> None:
        object.__setattr__(self, "stereo_edges", np.asarray(self.stereo_edges, dtype=np.float64).reshape(-1, 3))
        object.__setattr__(self, "laser_edges", np.asarray(self.laser_edges, dtype=np.float64).reshape(-1, 3))
        if (self.field.width, self.field.height) != (self.k.width, self.k.height):
            raise InvalidArgumentError(
                f"frame {self.id}: field {self.field.width}x{self.field.height} does not match "
                f"thermal image {self.k.width}x{self.k.height}"
            )

    @property
    def points(self) -> NDArray[np.float64]:
        """Stereo edges followed by laser edges, all in the stereo frame."""
        return np.vstack([self.stereo_edges, self.t_sl.transform_points(self.laser_edges)])

    @property
    def n_stereo(self) -> int:
        return len(self.stereo_edges)


@dataclass(frozen=True)
class InlierSelection:
    id: str
    stereo: NDArray[np.bool_]
    laser: NDArray[np.bool_]

    @property
    def mask(self) -> NDArray[np.bool_]:
        return np.concatenate([self.stereo, self.laser])

    @property
    def count(self) -> int:
        return int(self.stereo.sum() + self.laser.sum())

    def same_as(self, other: InlierSelection) -> bool:
        return np.array_equal(self.stereo, other.stereo) and np.array_equal(self.laser, other.laser)


# ===== Projection =====


def project_stereo_edge(p: ArrayLike, t_st: Pose, k: PinholeIntrinsics) -> NDArray[np.float64]:
    """Thermal pixel of a stereo-frame point; raises BehindCameraError when z <= 0."""
    return project(k, t_st.inverse().transform_point(p))


def project_laser_edge(q: ArrayLike, t_st: Pose, t_sl: Pose, k: PinholeIntrinsics) -> NDArray[np.float64]:
    return project(k, (t_st.inverse() @ t_sl).transform_point(q))


def _field_samples(
    field: AttractionField, k: PinholeIntrinsics, points_thermal: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.bool_]]:
    uv, front = project_points(k, points_thermal)
    values, grads, inside = field.sample_many(uv)
    return values, grads, front & inside


def select_inliers(s: EdgeProjectionSet, t_st: Pose, th: float) -> InlierSelection:
    """Points that project in front of the camera, inside the field, with ``G <= th``."""
    values, _, usable = _field_samples(s.field, s.k, t_st.inverse().transform_points(s.points))
    keep = usable & (values <= th)
    return InlierSelection(s.id, keep[: s.n_stereo], keep[s.n_stereo :])


def select_all_inliers(sets: Sequence[EdgeProjectionSet], t_st: Pose, th: float) -> list[InlierSelection]:
    return [select_inliers(s, t_st, th) for s in sets]


def reae_cost(
    sets: Sequence[EdgeProjectionSet], t_st: Pose, inliers: Sequence[InlierSelection]
) -> float:
    """Sum of field values at the projections of the frozen inliers."""
    if sum(sel.count for sel in inliers) == 0:
        raise DegenerateProblemError("no inlier edge point in any frame")
    t_ts = t_st.inverse()
    total = 0.0
    for s, sel in zip(sets, inliers, strict=True):
        pts = s.points[sel.mask]
        if len(pts):
            values, _, _ = _field_samples(s.field, s.k, t_ts.transform_points(pts))
            total += float(values.sum())
    return total


def outer_cost(sets: Sequence[EdgeProjectionSet], t_st: Pose, th: float) -> float:
    """Field values over every edge point, each capped at ``th``.

    Points behind the camera or outside the field count ``th``. Equals
    :func:`reae_cost` over the inliers selected at ``t_st`` plus ``th`` per
    outlier.
    """
    t_ts = t_st.inverse()
    total = 0.0
    for s in sets:
        values, _, usable = _field_samples(s.field, s.k, t_ts.transform_points(s.points))
        total += float(np.where(usable, np.minimum(values, th), th).sum())
    return total


def reae_jacobian_row(
    point: ArrayLike, field: AttractionField, k: PinholeIntrinsics, t_ts: Pose
) -> NDArray[np.float64]:
    """d G(proj(T_TS p)) / d delta for a left perturbation of ``T_TS``; zero when clamped."""
    p_t = t_ts.transform_point(point).reshape(1, 3)
    _, grads, usable = _field_samples(field, k, p_t)
    if not usable[0]:
        return np.zeros(6)
    return grads[0] @ projection_jacobians(k, p_t)[0]


@dataclass(frozen=True, eq=False)
class ReaeBlock:
    """Field-value residuals of one frame's frozen inliers, evaluated at ``T_TS``."""

    field: AttractionField
    k: PinholeIntrinsics
    points: NDArray[np.float64]  # stereo frame

    def evaluate(self, pose: Pose, with_jacobian: bool = True):
        p_t = pose.transform_points(self.points)
        values, grads, usable = _field_samples(self.field, self.k, p_t)
        if not with_jacobian:
            return values, None
        jac = np.zeros((len(p_t), 6))
        front = p_t[:, 2] > MIN_DEPTH
        jac[front] = np.einsum("ni,nij->nj", grads[front], projection_jacobians(self.k, p_t[front]))
        jac[~usable] = 0.0
        return values, jac


# ===== Rough calibration =====


def _grid(half_range: float, step: float) -> NDArray[np.float64]:
    n = int(np.floor(half_range / step + 1e-9))
    return step * np.arange(-n, n + 1)


def _ranked_offsets(values: NDArray[np.float64]) -> list[tuple[tuple[int, int, int], NDArray[np.float64]]]:
    """3D grid offsets in lexicographic index order, with their integer indices."""
    n = (len(values) - 1) // 2
    out = []
    for i, j, l in itertools.product(range(len(values)), repeat=3):
        out.append(((i - n, j - n, l - n), np.array([values[i], values[j], values[l]])))
    return out


def _count_inliers(
    sets: Sequence[EdgeProjectionSet], points: Sequence[NDArray[np.float64]], t_st: Pose, th: float
) -> int:
    t_ts = t_st.inverse()
    total = 0
    for s, pts in zip(sets, points, strict=True):
        uv, front = project_points(s.k, t_ts.transform_points(pts))
        inside = s.field.inside(uv) & front
        if inside.any():
            values, _, _ = s.field.sample_many(uv[inside])
            total += int(np.count_nonzero(values <= th))
    return total


def _best_candidate(
    candidates: list[tuple[tuple[int, int, int], Pose]],
    sets: Sequence[EdgeProjectionSet],
    points: Sequence[NDArray[np.float64]],
    th: float,
) -> tuple[Pose, int]:
    best_key: tuple[int, int, tuple[int, int, int]] | None = None
    best_pose = candidates[0][1]
    best_count = 0
    for index, pose in candidates:
        count = _count_inliers(sets, points, pose, th)
        # most inliers, then the smallest offset, then grid order
        key = (-count, sum(i * i for i in index), index)
        if best_key is None or key < best_key:
            best_key, best_pose, best_count = key, pose, count
    return best_pose, best_count


def rough_calibrate(
    sets: Sequence[EdgeProjectionSet], t_init: Pose, params: ReaeParams | None = None
) -> Pose:
    """Two grid searches maximising the inlier count: rotation offsets, then translation offsets."""
    params = params or ReaeParams()
    if not sets:
        raise InvalidArgumentError("rough calibration needs at least one frame")
    if params.inlier_threshold <= 0:
        raise DegenerateProblemError("an inlier threshold of 0 px admits no inlier edge points")
    points = [s.points for s in sets]

    rot_values = _grid(params.rotation_half_range_deg, params.rotation_grid_deg)
    rot_candidates = []
    for index, offset in _ranked_offsets(rot_values):
        r_off = Rotation.from_euler("ZYX", offset[::-1], degrees=True).as_matrix()
        rot_candidates.append((index, Pose(r_off @ t_init.rotation, t_init.translation)))
    with PerformanceMonitor("rough_rotation_search"):
        stage1, count1 = _best_candidate(rot_candidates, sets, points, params.inlier_threshold)
    if count1 == 0:
        raise InitializationOutOfRangeError(
            "no rotation candidate projects any edge point within the inlier threshold; "
            "the initial guess is outside the grid-search range"
        )

    trans_values = _grid(params.translation_half_range_m, params.translation_grid_m)
    trans_candidates = [
        (index, Pose(stage1.rotation, stage1.translation + offset))
        for index, offset in _ranked_offsets(trans_values)
    ]
    with PerformanceMonitor("rough_translation_search"):
        stage2, count2 = _best_candidate(trans_candidates, sets, points, params.inlier_threshold)
    logger.info("rough_calibration_done", rotation_inliers=count1, translation_inliers=count2)
    return stage2


# ===== Refinement =====


@measure_time
def calibrate_thermal(
    sets: Sequence[EdgeProjectionSet],
    t_init: Pose,
    params: ReaeParams | None = None,
    solve_options: SolveOptions | None = None,
) -> CalibrationResult:
    """Estimate ``T_ST``: optional rough grid search, then freeze/solve/re-select iterations.

    An iteration that would raise :func:`outer_cost` is not taken, so ``trace``
    never increases.
    """
    params = params or ReaeParams()
    sets = [s for s in sets if len(s.stereo_edges) + len(s.laser_edges) > 0]
    if not sets:
        raise DegenerateProblemError("no frame holds any 3D edge point")

    start = rough_calibrate(sets, t_init, params) if params.rough_calibration else t_init
    t_ts = start.inverse()
    result = CalibrationResult(target="T_ST", pose=start, init=t_init)
    th = params.inlier_threshold
    inliers = select_all_inliers(sets, start, th)
    previous_cost = outer_cost(sets, start, th)
    result.trace.append(previous_cost)

    for iteration in range(params.max_outer_iterations):
        if sum(sel.count for sel in inliers) == 0:
            raise DegenerateProblemError("no inlier edge point in any frame")
        blocks: list[ResidualBlock] = [
            ReaeBlock(s.field, s.k, s.points[sel.mask])
            for s, sel in zip(sets, inliers, strict=True)
            if sel.count
        ]
        stalled = False
        try:
            report: SolveReport = solve(blocks, t_ts, solve_options)
        except SolverStalledError as e:
            report = e.report
            stalled = True
        result.iterations = iteration + 1
        result.solve_traces.append(list(report.cost_trace))
        result.counts = {sel.id: sel.count for sel in inliers}
        candidate = report.pose.inverse()
        cost = outer_cost(sets, candidate, th)
        if cost > previous_cost:
            # keep the previous pose
            logger.info("reae_outer_step_rejected", iteration=iteration + 1, cost=cost, kept=previous_cost)
            result.termination = "stalled" if stalled else "converged"
            break

        change = pose_change(report.pose, t_ts)
        t_ts = report.pose
        result.trace.append(cost)
        reselected = select_all_inliers(sets, candidate, th)
        unchanged = all(a.same_as(b) for a, b in zip(inliers, reselected, strict=True))
        logger.info(
            "reae_outer_iteration",
            iteration=iteration + 1,
            cost=cost,
            inliers=sum(sel.count for sel in reselected),
            change=change,
        )
        if stalled:
            result.termination = "stalled"
            logger.warning("reae_solver_stalled", iteration=iteration + 1)
            break
        small_decrease = previous_cost - cost <= params.cost_tolerance * max(previous_cost, 1e-300)
        if change < params.pose_tolerance or (unchanged and small_decrease):
            result.termination = "converged"
            break
        inliers = reselected
        previous_cost = cost
    else:
        result.termination = "max_iterations"

    result.pose = t_ts.inverse()
    final = select_all_inliers(sets, result.pose, th)
    for s, sel in zip(sets, final, strict=True):
        pts = s.points[sel.mask]
        if len(pts):
            values, _, _ = _field_samples(s.field, s.k, t_ts.transform_points(pts))
            result.frame_residuals[s.id] = float(values.mean())
        else:
            result.frame_residuals[s.id] = 0.0
    return result
