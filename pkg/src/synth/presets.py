"""Named scenes: a back wall alone, one box, and a four-scene suite with 2-4 boxes."""

from __future__ import annotations

from typing import Any

from src.exceptions import InvalidArgumentError
from src.synth.scene import Box, SceneSpec

WALL = Box(name="wall", center=(0.0, 0.0, 9.0), size=(16.0, 9.0, 0.2), intensity=50)

PRESETS: dict[str, list[Box]] = {
    "single_wall": [WALL],
    "box_on_wall": [
        WALL,
        Box(name="box", center=(0.0, 0.3, 6.0), size=(1.6, 1.8, 1.0), intensity=150),
    ],
    "suite_a": [
        WALL,
        Box(name="a1", center=(-1.8, 0.4, 5.5), size=(1.2, 1.6, 1.0), intensity=100),
        Box(name="a2", center=(1.6, -0.2, 6.5), size=(1.4, 1.2, 0.8), intensity=200),
    ],
    "suite_b": [
        WALL,
        Box(name="b1", center=(-2.2, 0.5, 6.0), size=(1.0, 2.0, 0.8), intensity=100),
        Box(name="b2", center=(0.2, -0.6, 5.0), size=(0.9, 0.9, 0.9), intensity=250),
        Box(name="b3", center=(2.3, 0.6, 7.0), size=(1.5, 1.4, 1.2), intensity=150),
    ],
    "suite_c": [
        WALL,
        Box(name="c1", center=(-1.2, -0.8, 4.8), size=(1.0, 1.0, 1.0), intensity=200),
        Box(name="c2", center=(1.0, 0.9, 5.8), size=(1.8, 1.0, 1.0), intensity=100),
        Box(name="c3", center=(-2.6, 0.8, 7.2), size=(1.2, 2.2, 0.8), intensity=250),
    ],
    "suite_d": [
        WALL,
        Box(name="d1", center=(-2.4, 0.2, 5.2), size=(0.9, 1.8, 0.9), intensity=100),
        Box(name="d2", center=(-0.6, -0.9, 6.0), size=(1.0, 0.8, 0.8), intensity=250),
        Box(name="d3", center=(1.0, 0.8, 4.6), size=(1.0, 1.0, 1.0), intensity=200),
        Box(name="d4", center=(2.6, -0.3, 6.8), size=(1.2, 1.6, 1.0), intensity=150),
    ],
}

SUITE = ("suite_a", "suite_b", "suite_c", "suite_d")


def preset(name: str, **overrides: Any) -> SceneSpec:
    """Scene ``name`` with any SceneSpec field replaced, e.g. ``preset("suite_a", seed=3)``."""
    if name not in PRESETS:
        raise InvalidArgumentError(f"unknown scene preset {name!r}; choose from {', '.join(PRESETS)}")
    return SceneSpec.model_validate({"name": name, "boxes": PRESETS[name], **overrides})
