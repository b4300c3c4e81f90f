"""Thermal image edges and the attraction field built from them.

Pipeline: Canny edge detection, removal of short and cluttered components,
then an exact Euclidean distance transform. The field stores raw pixel
distances; normalization happens only when rendering.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import ndimage

from src.core.logging import get_logger
from src.exceptions import DataValidationError, EmptyEdgesError, OutOfFieldError
from src.frontend.stereo import EdgeMap
from src.io.images import write_pgm

logger = get_logger(__name__)

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)
CLUTTER_WARNING_FRACTION = 0.3


class CannyParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma: float = Field(default=1.4, gt=0, description="Gaussian smoothing sigma in pixels")
    low_threshold: float = Field(default=40.0, gt=0, description="Hysteresis low threshold")
    high_threshold: float = Field(default=100.0, gt=0, description="Hysteresis high threshold")
    min_length: int = Field(default=50, ge=1, description="Shortest kept edge chain in pixels")

    @model_validator(mode="after")
    def _ordered_thresholds(self) -> CannyParams:
        if self.low_threshold >= self.high_threshold:
            raise ValueError("low_threshold must be below high_threshold")
        return self


# ===== Canny =====


def _non_maximum_suppression(
    mag: NDArray[np.float64], gx: NDArray[np.float64], gy: NDArray[np.float64]
) -> NDArray[np.bool_]:
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    # (row, col) step towards the "next" neighbour for each direction bin
    bins = np.select(
        [angle < 22.5, angle < 67.5, angle < 112.5, angle < 157.5],
        [0, 1, 2, 3],
        default=0,
    )
    steps = [(0, 1), (1, 1), (1, 0), (1, -1)]

    h, w = mag.shape
    padded = np.pad(mag, 1, mode="constant")
    keep = np.zeros_like(mag, dtype=bool)
    for b, (dr, dc) in enumerate(steps):
        nxt = padded[1 + dr : 1 + dr + h, 1 + dc : 1 + dc + w]
        prev = padded[1 - dr : 1 - dr + h, 1 - dc : 1 - dc + w]
        # ties resolve towards the "next" pixel so plateaus stay one pixel wide
        keep |= (bins == b) & (mag >= prev) & (mag > nxt)
    keep &= mag > 0
    keep[0, :] = keep[-1, :] = False
    keep[:, 0] = keep[:, -1] = False
    return keep


def canny(image: ArrayLike, params: CannyParams | None = None) -> EdgeMap:
    """Gaussian smoothing, Sobel gradients, 4-bin NMS and 8-connected hysteresis."""
    params = params or CannyParams()
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or min(img.shape) < 5:
        raise DataValidationError(f"canny needs a 2D image of at least 5x5, got {img.shape}")
    smoothed = ndimage.gaussian_filter(img, params.sigma, mode="nearest")
    gx = ndimage.sobel(smoothed, axis=1, mode="nearest")
    gy = ndimage.sobel(smoothed, axis=0, mode="nearest")
    mag = np.hypot(gx, gy)

    thin = _non_maximum_suppression(mag, gx, gy)
    strong = thin & (mag >= params.high_threshold)
    weak = thin & (mag >= params.low_threshold)
    labels, _ = ndimage.label(weak, structure=EIGHT_CONNECTED)
    seeds = np.unique(labels[strong])
    seeds = seeds[seeds > 0]
    return np.isin(labels, seeds)


# ===== Filtering =====


@dataclass(frozen=True)
class EdgeFilterReport:
    input_pixels: int
    short_pixels: int
    cluttered_pixels: int

    @property
    def kept_pixels(self) -> int:
        return self.input_pixels - self.short_pixels - self.cluttered_pixels

    @property
    def cluttered_fraction(self) -> float:
        return self.cluttered_pixels / self.input_pixels if self.input_pixels else 0.0


def filter_edges_report(
    edges: EdgeMap,
    min_length: int,
    cluttered_fill_ratio: float = 0.5,
    remove_cluttered: bool = True,
) -> tuple[EdgeMap, EdgeFilterReport]:
    """Drop short 8-connected components and dense, blob-like ones.

    The fill-ratio rule only looks at components whose bounding box is at
    least 3 px in both directions; thinner ones are chains.
    """
    edges = np.asarray(edges, dtype=bool)
    labels, count = ndimage.label(edges, structure=EIGHT_CONNECTED)
    if count == 0:
        return edges.copy(), EdgeFilterReport(0, 0, 0)
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    remove = np.zeros(count + 1, dtype=bool)
    short = sizes < min_length
    short[0] = False
    remove |= short

    cluttered = np.zeros(count + 1, dtype=bool)
    if remove_cluttered:
        for label, box in enumerate(ndimage.find_objects(labels), start=1):
            if box is None or short[label]:
                continue
            h = box[0].stop - box[0].start
            w = box[1].stop - box[1].start
            if h >= 3 and w >= 3 and sizes[label] / (h * w) > cluttered_fill_ratio:
                cluttered[label] = True
        remove |= cluttered

    kept = edges & ~remove[labels]
    report = EdgeFilterReport(
        input_pixels=int(edges.sum()),
        short_pixels=int(sizes[short].sum()),
        cluttered_pixels=int(sizes[cluttered].sum()),
    )
    if report.cluttered_fraction > CLUTTER_WARNING_FRACTION:
        logger.warning(
            "cluttered_edges_removed",
            fraction=round(report.cluttered_fraction, 3),
            pixels=report.cluttered_pixels,
        )
    return kept, report


def filter_edges(
    edges: EdgeMap,
    min_length: int,
    cluttered_fill_ratio: float = 0.5,
    remove_cluttered: bool = True,
) -> EdgeMap:
    kept, _ = filter_edges_report(edges, min_length, cluttered_fill_ratio, remove_cluttered)
    return kept


# ===== Attraction field =====


@dataclass(frozen=True, eq=False)
class AttractionField:
    """Euclidean distance (pixels) from each pixel to the nearest edge pixel.

    Indexed ``values[v, u]``. Sampling is valid on ``u in [1, width-2]`` and
    ``v in [1, height-2]``.
    """

    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2 or min(v.shape) < 4:
            raise DataValidationError(f"attraction field must be at least 4x4, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def inside(self, uv: ArrayLike) -> NDArray[np.bool_]:
        px = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
        with np.errstate(invalid="ignore"):
            return (
                (px[:, 0] >= 1)
                & (px[:, 0] <= self.width - 2)
                & (px[:, 1] >= 1)
                & (px[:, 1] <= self.height - 2)
            )

    def _cells(
        self, px: NDArray[np.float64]
    ) -> tuple[NDArray[np.int64], NDArray[np.int64], NDArray[np.float64], NDArray[np.float64]]:
        x0 = np.minimum(np.floor(px[:, 0]).astype(np.int64), self.width - 3)
        y0 = np.minimum(np.floor(px[:, 1]).astype(np.int64), self.height - 3)
        return x0, y0, px[:, 0] - x0, px[:, 1] - y0

    def sample_many(
        self, uv: ArrayLike
    ) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.bool_]]:
        """Values (N,), gradients (N, 2) and the inside mask.

        Points outside the samplable region (or NaN) are clamped to its border
        and given a zero gradient.
        """
        px = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
        inside = self.inside(px)
        clamped = np.where(np.isfinite(px), px, 1.0)
        clamped[:, 0] = np.clip(clamped[:, 0], 1, self.width - 2)
        clamped[:, 1] = np.clip(clamped[:, 1], 1, self.height - 2)

        x0, y0, fx, fy = self._cells(clamped)
        g = self.values
        g00 = g[y0, x0]
        g01 = g[y0, x0 + 1]
        g10 = g[y0 + 1, x0]
        g11 = g[y0 + 1, x0 + 1]
        top = (1 - fx) * g00 + fx * g01
        bottom = (1 - fx) * g10 + fx * g11
        values = (1 - fy) * top + fy * bottom

        grads = np.zeros((len(px), 2))
        grads[:, 0] = (1 - fy) * (g01 - g00) + fy * (g11 - g10)
        grads[:, 1] = bottom - top
        grads[~inside] = 0.0
        return values, grads, inside


def build_attraction_field(edges: EdgeMap) -> AttractionField:
    """Exact Euclidean distance transform of an edge map."""
    mask = np.asarray(edges, dtype=bool)
    if not mask.any():
        raise EmptyEdgesError("edge map holds no edge pixel")
    return AttractionField(ndimage.distance_transform_edt(~mask))


def _require_inside(field: AttractionField, uv: ArrayLike) -> NDArray[np.float64]:
    px = np.asarray(uv, dtype=np.float64).reshape(1, 2)
    if not field.inside(px)[0]:
        raise OutOfFieldError(
            f"pixel ({px[0, 0]:.3f}, {px[0, 1]:.3f}) is outside the samplable field region"
        )
    return px


def sample_field(field: AttractionField, uv: ArrayLike) -> float:
    values, _, _ = field.sample_many(_require_inside(field, uv))
    return float(values[0])


def sample_gradient(field: AttractionField, uv: ArrayLike) -> NDArray[np.float64]:
    """Exact derivative of the bilinear interpolant, (dG/du, dG/dv)."""
    _, grads, _ = field.sample_many(_require_inside(field, uv))
    return grads[0]


def save_field_pgm(field: AttractionField, path: Path | str) -> None:
    """Debug dump: min(G, 255) rounded, ASCII PGM."""
    values = np.where(np.isfinite(field.values), field.values, 255.0)
    write_pgm(np.rint(np.minimum(values, 255.0)).astype(np.uint8), path)
