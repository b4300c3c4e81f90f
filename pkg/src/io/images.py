"""8-bit grayscale image I/O (PNG and ASCII PGM)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray
from PIL import Image, UnidentifiedImageError

from src.exceptions import MissingFileError, ParseError

PGM_VALUES_PER_LINE = 16


def load_gray(path: Path | str) -> NDArray[np.uint8]:
    """Read a PNG or PGM (P2/P5) as an (H, W) uint8 array."""
    path = Path(path)
    if not path.exists():
        raise MissingFileError(f"image not found: {path}")
    try:
        with Image.open(path) as img:
            return np.array(img.convert("L"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as e:
        raise ParseError(path, 0, f"unreadable image: {e}") from e


def _as_uint8(image: ArrayLike) -> NDArray[np.uint8]:
    arr = np.asarray(image)
    if arr.dtype == bool:
        return np.where(arr, 255, 0).astype(np.uint8)
    return np.clip(np.rint(arr), 0, 255).astype(np.uint8)


def save_png(image: ArrayLike, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(_as_uint8(image)).save(path, format="PNG")


def write_pgm(image: ArrayLike, path: Path | str) -> None:
    """Plain (ASCII, P2) PGM with maxval 255."""
    data = _as_uint8(image)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    h, w = data.shape
    lines = ["P2", f"{w} {h}", "255"]
    for row in data:
        for start in range(0, w, PGM_VALUES_PER_LINE):
            lines.append(" ".join(str(int(v)) for v in row[start : start + PGM_VALUES_PER_LINE]))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def save_gray(image: ArrayLike, path: Path | str) -> None:
    """Write by suffix: ``.pgm`` as ASCII PGM, anything else as PNG."""
    if Path(path).suffix.lower() == ".pgm":
        write_pgm(image, path)
    else:
        save_png(image, path)
