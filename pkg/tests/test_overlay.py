"""Tests for diagnostic overlays."""

import numpy as np
import pytest
from PIL import Image

from src.geometry import PinholeIntrinsics, Pose
from src.renderer import MarkLayer, MarkRenderer, OverlayBuilder, OverlayMode, near_edge_fraction, project_marks

K = PinholeIntrinsics(fx=100, fy=100, cx=32, cy=24, width=64, height=48)


class TestProjectMarks:
    """Tests for project_marks()."""

    def test_filters_depth_and_bounds(self):
        """Only in-image points no deeper than the limit survive."""
        points = np.array(
            [
                [0.0, 0.0, 2.0],  # centre
                [0.0, 0.0, 20.0],  # too deep
                [0.0, 0.0, -2.0],  # behind
                [5.0, 0.0, 2.0],  # off the image
            ]
        )
        uv, depth = project_marks(points, Pose.identity(), K, depth_max=10.0)
        assert np.allclose(uv, [[32.0, 24.0]])
        assert depth.tolist() == [2.0]

    def test_applies_extrinsic(self):
        """Points are moved into the camera frame first."""
        uv, _ = project_marks(np.array([[0.0, 0.0, 0.0]]), Pose.from_translation([0.0, 0.0, 4.0]), K, 10.0)
        assert np.allclose(uv, [[32.0, 24.0]])


class TestNearEdgeFraction:
    """Tests for near_edge_fraction()."""

    def test_fraction(self):
        """Marks within the distance count; others do not."""
        edges = np.zeros((48, 64), dtype=bool)
        edges[:, 10] = True
        uv = np.array([[10.0, 5.0], [12.0, 5.0], [13.0, 5.0], [30.0, 5.0]])
        assert near_edge_fraction(uv, edges, 2.0) == 0.5

    def test_empty_inputs(self):
        """No marks or no edges give zero."""
        edges = np.zeros((48, 64), dtype=bool)
        assert near_edge_fraction(np.zeros((0, 2)), edges, 2.0) == 0.0
        assert near_edge_fraction(np.array([[3.0, 3.0]]), edges, 2.0) == 0.0


class TestOverlayBuilder:
    """Tests for OverlayBuilder."""

    def test_image_size_and_marks(self):
        """Overlays are RGB at camera size with marks in the layer color."""
        builder = OverlayBuilder(64, 48, mark_radius=0)
        layer = MarkLayer("laser", np.array([[40.0, 30.0]]), np.array([2.0]), MarkRenderer.COLOR_LASER)

        image = builder.build(OverlayMode.LASER_ON_RGB, np.zeros((48, 64), dtype=np.uint8), [layer])

        assert isinstance(image, Image.Image)
        assert image.size == (64, 48)
        assert image.mode == "RGB"
        assert image.getpixel((40, 30)) == MarkRenderer.COLOR_LASER

    def test_edges_drawn_in_thermal_mode(self):
        """Edge pixels are tinted only for thermal overlays."""
        edges = np.zeros((48, 64), dtype=bool)
        edges[40, 50] = True
        background = np.zeros((48, 64), dtype=np.uint8)
        builder = OverlayBuilder(64, 48)

        thermal = builder.build(OverlayMode.EDGES_ON_THERMAL, background, [], edges)
        rgb = builder.build(OverlayMode.LASER_ON_RGB, background, [], edges)

        assert thermal.getpixel((50, 40)) == MarkRenderer.COLOR_EDGE
        assert rgb.getpixel((50, 40)) == (0, 0, 0)

    def test_background_size_mismatch(self):
        """The background must match the camera size."""
        with pytest.raises(ValueError, match="expected 64x48"):
            OverlayBuilder(64, 48).build(OverlayMode.LASER_ON_RGB, np.zeros((10, 10), dtype=np.uint8), [])
