"""``calibrate-laser`` and ``calibrate-thermal`` commands."""

from __future__ import annotations

from pathlib import Path

from src.calib import CalibrationResult, calibrate_laser, calibrate_thermal, load_result, save_result
from src.commands.pipeline import edge_sets, icp_frames, load_frames
from src.config import Settings
from src.core.logging import bind_context, get_logger
from src.exceptions import ConfigError, DataValidationError
from src.geometry import EulerPose
from src.io import load_dataset

logger = get_logger(__name__)

LASER_RESULT_NAME = "laser_calib.json"
THERMAL_RESULT_NAME = "thermal_calib.json"


def _initial_guess(explicit: EulerPose | None, suggested: EulerPose | None, name: str) -> EulerPose:
    if explicit is not None:
        return explicit
    if suggested is not None:
        logger.info("using_manifest_init", target=name)
        return suggested
    raise ConfigError(f"no initial {name}: pass --init or set it in manifest.json")


def _finish(result: CalibrationResult, settings: Settings, output: Path) -> Path:
    result.params = settings.snapshot()
    save_result(result, output)
    logger.info(
        "calibration_written",
        target=result.target,
        path=str(output),
        iterations=result.iterations,
        termination=result.termination,
        final_cost=result.trace[-1] if result.trace else None,
    )
    return output


def cmd_calibrate_laser(
    dataset_root: Path | str,
    settings: Settings,
    init: EulerPose | None = None,
    output: Path | str | None = None,
) -> Path:
    """Triangulate every frame, then register stereo to laser clouds; writes ``laser_calib.json``."""
    bind_context(command="calibrate-laser")
    dataset = load_dataset(dataset_root)
    start = _initial_guess(init, dataset.manifest.init_laser, "T_SL")
    frames = load_frames(dataset, require_matches=True)
    result = calibrate_laser(
        icp_frames(dataset, frames, settings), start.to_pose(), settings.icp, settings.solver
    )
    return _finish(result, settings, Path(output) if output else dataset.root / LASER_RESULT_NAME)


def cmd_calibrate_thermal(
    dataset_root: Path | str,
    settings: Settings,
    init: EulerPose | None = None,
    laser_calib: Path | str | None = None,
    output: Path | str | None = None,
) -> Path:
    """Align stereo and laser edges with thermal edges; writes ``thermal_calib.json``."""
    bind_context(command="calibrate-thermal")
    dataset = load_dataset(dataset_root)
    laser_path = Path(laser_calib) if laser_calib else dataset.root / LASER_RESULT_NAME
    laser = load_result(laser_path)
    if laser.target != "T_SL":
        raise DataValidationError(f"{laser_path}: expected a T_SL result, found {laser.target!r}")
    start = _initial_guess(init, dataset.manifest.init_thermal, "T_ST")
    frames = load_frames(dataset, require_matches=True)
    sets = edge_sets(dataset, frames, laser.pose, settings)
    result = calibrate_thermal(sets, start.to_pose(), settings.reae, settings.solver)
    return _finish(result, settings, Path(output) if output else dataset.root / THERMAL_RESULT_NAME)
