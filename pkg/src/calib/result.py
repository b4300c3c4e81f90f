"""Calibration result container and its JSON form."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from src.exceptions import DataValidationError, ParseError
from src.geometry import EulerPose, Pose
from src.io.dataset import dump_json, read_json
from src.types import CalibrationResultDict, PoseDict

MATRIX_POSE_TOL = 1e-9


def pose_dict(pose: Pose) -> PoseDict:
    return EulerPose.from_pose(pose).model_dump()  # type: ignore[return-value]


@dataclass
class CalibrationResult:
    """Estimated extrinsic plus convergence diagnostics.

    ``pose`` is the reported transform (``T_SL`` or ``T_ST``), ``trace`` holds
    one cost per outer iteration: the post-solve ICP cost for ``T_SL``, the capped
    edge cost at the start and after each accepted iteration for ``T_ST``.
    """

    target: str
    pose: Pose
    trace: list[float] = field(default_factory=list)
    solve_traces: list[list[float]] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)
    frame_residuals: dict[str, float] = field(default_factory=dict)
    iterations: int = 0
    termination: str = ""
    init: Pose | None = None
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.termination == "converged"

    def to_dict(self) -> CalibrationResultDict:
        return {
            "target": self.target,
            "pose": pose_dict(self.pose),
            "matrix": [float(v) for v in self.pose.to_matrix().ravel()],
            "init": pose_dict(self.init) if self.init is not None else None,
            "trace": [float(c) for c in self.trace],
            "solve_traces": [[float(c) for c in t] for t in self.solve_traces],
            "counts": dict(self.counts),
            "frame_residuals": {k: float(v) for k, v in self.frame_residuals.items()},
            "iterations": self.iterations,
            "termination": self.termination,
            "params": self.params,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], source: str = "<result>") -> CalibrationResult:
        try:
            pose = Pose.from_matrix(np.asarray(data["matrix"], dtype=np.float64))
            euler = EulerPose.model_validate(data["pose"])
            init = data.get("init")
            result = cls(
                target=str(data.get("target", "")),
                pose=pose,
                trace=[float(c) for c in data.get("trace", [])],
                solve_traces=[[float(c) for c in t] for t in data.get("solve_traces", [])],
                counts={str(k): int(v) for k, v in data.get("counts", {}).items()},
                frame_residuals={str(k): float(v) for k, v in data.get("frame_residuals", {}).items()},
                iterations=int(data.get("iterations", 0)),
                termination=str(data.get("termination", "")),
                init=EulerPose.model_validate(init).to_pose() if init is not None else None,
                params=dict(data.get("params", {})),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(source, 0, f"malformed calibration result: {e}") from e
        if not euler.near_gimbal_lock():
            drift = np.abs(euler.to_pose().to_matrix() - pose.to_matrix()).max()
            if drift > MATRIX_POSE_TOL:
                raise DataValidationError(f"{source}: 'pose' and 'matrix' disagree by {drift:.3g}")
        return result


def save_result(result: CalibrationResult, path: Path | str) -> Path:
    path = Path(path)
    dump_json(result.to_dict(), path)
    return path


def load_result(path: Path | str) -> CalibrationResult:
    path = Path(path)
    data = read_json(path)
    if not isinstance(data, dict):
        raise ParseError(path, 1, "calibration result must be a JSON object")
    return CalibrationResult.from_dict(data, source=str(path))
