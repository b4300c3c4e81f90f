"""Overlay builder for calibration diagnostics.

Projects 3D points through an estimated extrinsic into a camera image and
marks where they land, so alignment can be judged by eye and by the fraction
of marks that fall near an image edge.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.typing import NDArray
from PIL import Image, ImageDraw
from scipy import ndimage

from src.core.logging import get_logger
from src.geometry import PinholeIntrinsics, Pose, project_points
from src.renderer.shapes import RGB, MarkRenderer

logger = get_logger(__name__)


class OverlayMode(StrEnum):
    LASER_ON_RGB = "laser-on-rgb"
    EDGES_ON_THERMAL = "edges-on-thermal"


@dataclass(frozen=True, eq=False)
class MarkLayer:
    """Pixels of one point source, drawn in one color."""

    name: str
    uv: NDArray[np.float64]
    depth: NDArray[np.float64]
    color: RGB
    edge_points: bool = True  # counted in the near-edge fraction

    def __len__(self) -> int:
        return len(self.uv)


def project_marks(
    points: NDArray[np.float64],
    t_cp: Pose,
    k: PinholeIntrinsics,
    depth_max: float,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Pixels and depths of the points that land in the image no deeper than ``depth_max``.

    ``t_cp`` maps the points' frame into the camera frame.
    """
    cam = t_cp.transform_points(points)
    uv, front = project_points(k, cam)
    keep = front & (cam[:, 2] <= depth_max)
    keep[keep] = k.contains(uv[keep])
    return uv[keep], cam[keep, 2]


def near_edge_fraction(uv: NDArray[np.float64], edges: NDArray[np.bool_], distance_px: float) -> float:
    """Share of marks whose pixel lies within ``distance_px`` of an edge pixel."""
    if len(uv) == 0 or not edges.any():
        return 0.0
    distance = ndimage.distance_transform_edt(~edges)
    px = np.rint(uv).astype(np.int64)
    return float(np.mean(distance[px[:, 1], px[:, 0]] <= distance_px))


class OverlayBuilder:
    """Builds overlay images for the diagnostic modes.

    Example:
        >>> builder = OverlayBuilder(width=640, height=480)
        >>> image = builder.build(OverlayMode.LASER_ON_RGB, left_image, [layer])
    """

    def __init__(self, width: int, height: int, mark_radius: int = 1):
        self.width = width
        self.height = height
        self.mark_radius = mark_radius
        self.renderer = MarkRenderer()

    def build(
        self,
        mode: OverlayMode,
        background: NDArray[np.uint8],
        layers: Sequence[MarkLayer],
        edges: NDArray[np.bool_] | None = None,
    ) -> Image.Image:
        if background.shape != (self.height, self.width):
            raise ValueError(
                f"background is {background.shape[1]}x{background.shape[0]}, expected {self.width}x{self.height}"
            )
        logger.debug("overlay_build", mode=str(mode), marks=sum(len(layer) for layer in layers))
        image = Image.fromarray(background).convert("RGB")
        draw = ImageDraw.Draw(image)

        if mode == OverlayMode.EDGES_ON_THERMAL and edges is not None:
            self.renderer.draw_edge_pixels(draw, edges, MarkRenderer.COLOR_EDGE)
        for layer in layers:
            self.renderer.draw_marks(draw, layer.uv, layer.color, self.mark_radius)
        self.renderer.draw_legend(draw, [(layer.name, layer.color) for layer in layers])
        return image
