"""``overlay`` command: project points through a calibration and mark them on an image."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from src.calib import load_result
from src.commands.calibrate import LASER_RESULT_NAME, THERMAL_RESULT_NAME
from src.commands.pipeline import laser_cloud, stereo_cloud, thermal_edges
from src.config import Settings
from src.core.logging import bind_context, get_logger
from src.exceptions import DataValidationError
from src.frontend import sobel_edges
from src.io import dump_json, load_dataset, load_frame
from src.renderer import MarkLayer, MarkRenderer, OverlayBuilder, OverlayMode, near_edge_fraction, project_marks
from src.types import OverlayReportDict

logger = get_logger(__name__)

OVERLAY_DIR = "overlays"
NEAR_POINT_COLOR = (255, 160, 0)


def _load_target(path: Path, target: str):
    result = load_result(path)
    if result.target != target:
        raise DataValidationError(f"{path}: expected a {target} result, found {result.target!r}")
    return result.pose


def cmd_overlay(
    dataset_root: Path | str,
    frame_id: str,
    mode: OverlayMode | str,
    settings: Settings,
    laser_calib: Path | str | None = None,
    thermal_calib: Path | str | None = None,
    depth_max: float | None = None,
    output: Path | str | None = None,
) -> OverlayReportDict:
    """Write ``<frame>_<mode>.png`` plus a JSON side-car with mark statistics.

    ``laser-on-rgb`` marks laser points on the left image using ``T_SL``;
    ``edges-on-thermal`` marks stereo and laser edge points on the thermal
    image using ``T_ST`` (and ``T_SL`` for the laser points).
    """
    mode = OverlayMode(mode)
    bind_context(command="overlay", frame=frame_id)
    dataset = load_dataset(dataset_root)
    frame = load_frame(dataset, frame_id, require_matches=mode == OverlayMode.EDGES_ON_THERMAL)
    manifest = dataset.manifest
    depth_max = settings.overlay.depth_max if depth_max is None else depth_max
    t_sl = _load_target(Path(laser_calib) if laser_calib else dataset.root / LASER_RESULT_NAME, "T_SL")
    laser = laser_cloud(dataset, frame, settings)

    if mode == OverlayMode.LASER_ON_RGB:
        k, background = manifest.k_left, frame.left
        edges = sobel_edges(frame.left, settings.stereo.sobel_threshold)
        near = laser.subset(~laser.edge_mask)
        uv, depth = project_marks(near.points, t_sl, k, depth_max)
        uv_e, depth_e = project_marks(laser.edge_points, t_sl, k, depth_max)
        layers = [
            MarkLayer("laser", uv, depth, NEAR_POINT_COLOR, edge_points=False),
            MarkLayer("laser edges", uv_e, depth_e, MarkRenderer.COLOR_LASER),
        ]
    else:
        t_ts = _load_target(
            Path(thermal_calib) if thermal_calib else dataset.root / THERMAL_RESULT_NAME, "T_ST"
        ).inverse()
        k, background = manifest.k_thermal, frame.thermal
        edges = thermal_edges(dataset, frame, settings)
        stereo = stereo_cloud(dataset, frame, settings)
        uv_s, depth_s = project_marks(stereo.edge_points, t_ts, k, depth_max)
        uv_l, depth_l = project_marks(laser.edge_points, t_ts @ t_sl, k, depth_max)
        layers = [
            MarkLayer("stereo edges", uv_s, depth_s, MarkRenderer.COLOR_STEREO),
            MarkLayer("laser edges", uv_l, depth_l, MarkRenderer.COLOR_LASER),
        ]

    marks = sum(len(layer) for layer in layers)
    if marks == 0:
        logger.warning("overlay_empty", depth_max=depth_max)
    edge_uv = np.vstack([layer.uv for layer in layers if layer.edge_points] or [np.zeros((0, 2))])
    fraction = near_edge_fraction(edge_uv, edges, settings.overlay.edge_distance_px)

    builder = OverlayBuilder(k.width, k.height, settings.overlay.mark_radius)
    image = builder.build(mode, background, layers, edges)
    out = Path(output) if output else dataset.root / OVERLAY_DIR / f"{frame_id}_{mode.value}.png"
    out.parent.mkdir(parents=True, exist_ok=True)
    image.save(out, format="PNG")

    report: OverlayReportDict = {
        "frame": frame_id,
        "mode": mode.value,
        "marks": marks,
        "near_edge_fraction": fraction,
        "layers": {layer.name: len(layer) for layer in layers},
    }
    dump_json(report, out.with_suffix(".json"))
    logger.info("overlay_written", path=str(out), marks=marks, near_edge_fraction=round(fraction, 3))
    return report
