"""``evaluate`` command: calibration error against ground truth."""

from __future__ import annotations

from pathlib import Path

from src.calib import load_result
from src.core.logging import bind_context, get_logger
from src.exceptions import InvalidPoseError, ParseError
from src.geometry import Pose, rotation_error_deg, translation_error_m
from src.io import dump_json, read_json
from src.types import ErrorDict, EvalReportDict

logger = get_logger(__name__)

EVAL_REPORT_NAME = "eval_report.json"


def pose_errors(estimate: Pose, truth: Pose) -> ErrorDict:
    """Geodesic rotation error in degrees and translation error in centimeters."""
    return {
        "rotation_deg": rotation_error_deg(estimate, truth),
        "translation_cm": 100.0 * translation_error_m(estimate, truth),
    }


def load_truth(path: Path | str, target: str) -> Pose:
    path = Path(path)
    data = read_json(path)
    if not isinstance(data, dict) or target not in data:
        raise ParseError(path, 1, f"ground truth has no {target!r} entry")
    try:
        return Pose.from_matrix(data[target])
    except (InvalidPoseError, TypeError, ValueError) as e:
        raise ParseError(path, 1, f"{target}: {e}") from e


def cmd_evaluate(
    result_path: Path | str, truth_path: Path | str, output: Path | str | None = None
) -> EvalReportDict:
    """Compare a result file with ``ground_truth.json``; writes ``eval_report.json``."""
    bind_context(command="evaluate")
    result_path = Path(result_path)
    result = load_result(result_path)
    truth = load_truth(truth_path, result.target)

    report: EvalReportDict = {
        "target": result.target,
        "result": pose_errors(result.pose, truth),
        "init": pose_errors(result.init, truth) if result.init is not None else None,
    }
    out = Path(output) if output else result_path.parent / EVAL_REPORT_NAME
    dump_json(report, out)
    logger.info(
        "evaluation",
        target=result.target,
        rotation_deg=round(report["result"]["rotation_deg"], 4),
        translation_cm=round(report["result"]["translation_cm"], 3),
        path=str(out),
    )
    return report
