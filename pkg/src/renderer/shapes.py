"""Mark drawing utilities.

Provides functions for drawing projected points and edge pixels on overlays.
"""

from collections.abc import Iterable

import numpy as np
from numpy.typing import NDArray
from PIL import ImageDraw

RGB = tuple[int, int, int]


class MarkRenderer:
    """Handles mark drawing operations."""

    # RGB color constants
    COLOR_LASER = (255, 0, 0)
    COLOR_STEREO = (0, 255, 0)
    COLOR_EDGE = (0, 160, 255)
    COLOR_TEXT = (255, 255, 255)

    def draw_marks(
        self,
        draw: ImageDraw.ImageDraw,
        uv: NDArray[np.float64],
        color: RGB,
        radius: int = 1,
    ) -> int:
        """Draw one dot per pixel position; returns how many were drawn."""
        for u, v in uv:
            if radius == 0:
                draw.point((float(u), float(v)), fill=color)
            else:
                draw.ellipse((u - radius, v - radius, u + radius, v + radius), fill=color)
        return len(uv)

    def draw_edge_pixels(self, draw: ImageDraw.ImageDraw, edges: NDArray[np.bool_], color: RGB) -> None:
        """Tint every edge pixel."""
        vs, us = np.nonzero(edges)
        if len(us) == 0:
            return
        draw.point(list(zip(us.tolist(), vs.tolist(), strict=True)), fill=color)

    def draw_legend(self, draw: ImageDraw.ImageDraw, entries: Iterable[tuple[str, RGB]]) -> None:
        y = 4
        for label, color in entries:
            draw.rectangle((4, y + 2, 12, y + 10), fill=color)
            draw.text((16, y), label, fill=self.COLOR_TEXT)
            y += 14
