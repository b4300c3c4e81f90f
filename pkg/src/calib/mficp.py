"""Multi-frame ICP calibration of the laser to stereo transform.

Every frame contributes its stereo cloud and its laser cloud; one shared
extrinsic is estimated by alternating gated nearest-neighbour correspondence
and a least-squares solve over all frames at once.

The solver works on ``T_LS = T_SL^-1`` (stereo to laser), which is the
transform applied to stereo points in the registration cost. Results are
reported as ``T_SL``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.calib.result import CalibrationResult
from src.core.logging import get_logger
from src.core.performance import measure_time
from src.exceptions import InvalidArgumentError, NoOverlapError, SolverStalledError
from src.geometry import Pose, hat, pose_change
from src.optim import ResidualBlock, SolveOptions, SolveReport, solve
from src.pointcloud import PointCloud, SpatialIndex

logger = get_logger(__name__)


class IcpParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_iterations: int = Field(default=50, gt=0, description="Outer correspondence iterations")
    initial_gate: float = Field(default=1.0, gt=0, description="Correspondence distance gate (m)")
    gate_decay: float = Field(default=0.9, gt=0, le=1, description="Gate factor per iteration")
    gate_floor: float = Field(default=0.2, gt=0, description="Smallest gate (m)")
    gating: bool = Field(default=True, description="Disable to use every nearest neighbour")
    pose_tolerance: float = Field(default=1e-6, gt=0, description="Twist norm of a pose update")

    @model_validator(mode="after")
    def _floor_below_gate(self) -> IcpParams:
        if self.gate_floor > self.initial_gate:
            raise ValueError("gate_floor must not exceed initial_gate")
        return self

    def gate_at(self, iteration: int) -> float:
        if not self.gating:
            return math.inf
        return max(self.gate_floor, self.initial_gate * self.gate_decay**iteration)


@dataclass(frozen=True, eq=False)
class IcpFrame:
    """Stereo cloud (stereo frame) and indexed laser cloud (laser frame) of one capture."""

    id: str
    stereo: PointCloud
    laser: SpatialIndex

    @classmethod
    def build(cls, frame_id: str, stereo: PointCloud, laser: PointCloud) -> IcpFrame:
        if len(stereo) == 0:
            raise InvalidArgumentError(f"frame {frame_id}: stereo cloud is empty")
        return cls(frame_id, stereo, SpatialIndex(laser))


@dataclass(frozen=True)
class FrameCorrespondences:
    id: str
    stereo: NDArray[np.float64]  # stereo-frame points with a gated partner
    laser: NDArray[np.float64]  # their nearest laser points
    squared_distances: NDArray[np.float64]
    ungated: int

    def __len__(self) -> int:
        return len(self.stereo)


def _correspond(frame: IcpFrame, t_ls: Pose, gate: float) -> FrameCorrespondences:
    moved = t_ls.transform_points(frame.stereo.points)
    idx, sq = frame.laser.query(moved)
    keep = sq <= gate * gate
    return FrameCorrespondences(
        id=frame.id,
        stereo=frame.stereo.points[keep],
        laser=frame.laser.points[idx[keep]],
        squared_distances=sq[keep],
        ungated=int(np.count_nonzero(~keep)),
    )


def mficp_correspondences(
    frames: Sequence[IcpFrame], t_sl: Pose, gate: float = math.inf
) -> list[FrameCorrespondences]:
    """Gated stereo to laser nearest-neighbour pairs under ``t_sl``."""
    t_ls = t_sl.inverse()
    return [_correspond(frame, t_ls, gate) for frame in frames]


def mficp_cost(frames: Sequence[IcpFrame], t_sl: Pose, gate: float = math.inf) -> float:
    """Summed squared distance of gated correspondences over all frames."""
    pairs = mficp_correspondences(frames, t_sl, gate)
    if sum(len(p) for p in pairs) == 0:
        raise NoOverlapError(f"no stereo point has a laser neighbour within {gate} m")
    return float(sum(p.squared_distances.sum() for p in pairs))


@dataclass(frozen=True, eq=False)
class PointToPointBlock:
    """Residuals ``T p - q`` with the analytic left-perturbation Jacobian ``[I, -hat(T p)]``."""

    source: NDArray[np.float64]
    target: NDArray[np.float64]

    def evaluate(self, pose: Pose, with_jacobian: bool = True):
        moved = pose.transform_points(self.source)
        residual = (moved - self.target).ravel()
        if not with_jacobian:
            return residual, None
        n = len(moved)
        jac = np.zeros((n, 3, 6))
        jac[:, :, :3] = np.eye(3)
        jac[:, :, 3:] = -np.stack([hat(p) for p in moved]) if n else np.zeros((0, 3, 3))
        return residual, jac.reshape(3 * n, 6)


@measure_time
def calibrate_laser(
    frames: Sequence[IcpFrame],
    t_sl_init: Pose,
    params: IcpParams | None = None,
    solve_options: SolveOptions | None = None,
) -> CalibrationResult:
    """Estimate ``T_SL`` by multi-frame ICP starting from ``t_sl_init``."""
    if not frames:
        raise InvalidArgumentError("laser calibration needs at least one frame")
    params = params or IcpParams()
    t_ls = t_sl_init.inverse()
    result = CalibrationResult(target="T_SL", pose=t_sl_init, init=t_sl_init)

    for iteration in range(params.max_iterations):
        gate = params.gate_at(iteration)
        pairs = [_correspond(frame, t_ls, gate) for frame in frames]
        total = sum(len(p) for p in pairs)
        if total == 0:
            raise NoOverlapError(f"no stereo point has a laser neighbour within {gate} m")
        blocks: list[ResidualBlock] = [PointToPointBlock(p.stereo, p.laser) for p in pairs if len(p)]

        stalled = False
        try:
            report: SolveReport = solve(blocks, t_ls, solve_options)
        except SolverStalledError as e:
            report = e.report
            stalled = True
        change = pose_change(report.pose, t_ls)
        t_ls = report.pose

        result.iterations = iteration + 1
        result.trace.append(report.final_cost)
        result.solve_traces.append(list(report.cost_trace))
        result.counts = {p.id: len(p) for p in pairs}
        logger.info(
            "icp_outer_iteration",
            iteration=iteration + 1,
            cost=report.final_cost,
            gate=gate,
            correspondences=total,
            change=change,
        )
        if stalled:
            result.termination = "stalled"
            logger.warning("icp_solver_stalled", iteration=iteration + 1)
            break
        if change < params.pose_tolerance:
            result.termination = "converged"
            break
    else:
        result.termination = "max_iterations"

    result.pose = t_ls.inverse()
    final = mficp_correspondences(frames, result.pose, params.gate_at(result.iterations - 1))
    result.frame_residuals = {
        p.id: float(np.sqrt(p.squared_distances).mean()) if len(p) else 0.0 for p in final
    }
    return result
