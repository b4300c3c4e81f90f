"""Diagnostic overlay rendering."""

from src.renderer.overlay import (
    MarkLayer,
    OverlayBuilder,
    OverlayMode,
    near_edge_fraction,
    project_marks,
)
from src.renderer.shapes import MarkRenderer

__all__ = [
    "MarkLayer",
    "MarkRenderer",
    "OverlayBuilder",
    "OverlayMode",
    "near_edge_fraction",
    "project_marks",
]
