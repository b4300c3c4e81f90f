"""Tests for depth-discontinuity laser edge detection."""

import numpy as np
import pytest
from pydantic import ValidationError

from src.exceptions import InvalidArgumentError
from src.frontend import LaserEdgeParams, detect_laser_edges, edge_stats, laser_edge_mask
from src.pointcloud import OrganizedScan, PointCloud


def scan_from_ranges(ranges, valid=None) -> OrganizedScan:
    """Rings of points at the given ranges, columns spread over a full turn."""
    r = np.atleast_2d(np.asarray(ranges, dtype=np.float64))
    rings, cols = r.shape
    az = 2.0 * np.pi * np.arange(cols) / cols
    el = np.linspace(0.2, -0.2, rings)[:, None]
    dirs = np.stack(
        [np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.broadcast_to(np.sin(el), r.shape)], axis=-1
    )
    if valid is None:
        valid = np.ones(r.shape, dtype=bool)
    return OrganizedScan(dirs * np.where(valid, r, 1.0)[..., None], valid)


def blocky_ranges(rng: np.random.Generator, rings: int, cols: int) -> np.ndarray:
    """Piecewise-constant rings with occasional depth jumps."""
    out = np.empty((rings, cols))
    for i in range(rings):
        level = rng.choice([4.0, 6.0, 9.0])
        for j in range(cols):
            if rng.random() < 0.08:
                level = rng.choice([4.0, 6.0, 9.0])
            out[i, j] = level + rng.uniform(-0.05, 0.05)
    return out


class TestDetectLaserEdges:
    """Tests for detect_laser_edges()."""

    def test_constant_ring_has_no_edges(self):
        """A flat sweep at constant range has no discontinuity."""
        cloud = detect_laser_edges(scan_from_ranges(np.full((3, 32), 7.0)))
        assert len(cloud) == 96
        assert not cloud.edge_mask.any()

    def test_step_flags_near_side_only(self):
        """Only the last near point before a jump is flagged."""
        params = LaserEdgeParams(k=2, epsilon=0.3, wrap=False)
        mask = laser_edge_mask(scan_from_ranges([5, 5, 5, 5, 10, 10, 10, 10]), params)
        assert np.flatnonzero(mask[0]).tolist() == [3]

    def test_step_with_wrap(self):
        """Wrapping makes the seam between the last and first column a second discontinuity."""
        params = LaserEdgeParams(k=2, epsilon=0.3, wrap=True)
        mask = laser_edge_mask(scan_from_ranges([5, 5, 5, 5, 10, 10, 10, 10]), params)
        assert np.flatnonzero(mask[0]).tolist() == [0, 3]

    def test_ramp_has_no_edges(self):
        """A steady ramp never satisfies the same-depth test on a full window."""
        params = LaserEdgeParams(k=2, epsilon=0.3, wrap=False)
        ramp = 5.0 + 0.2 * np.arange(16)
        assert not laser_edge_mask(scan_from_ranges(ramp), params).any()

    def test_epsilon_boundary(self):
        """Same-depth is inclusive at epsilon, farther is strict."""
        params = LaserEdgeParams(k=1, epsilon=0.5, wrap=False)
        # points on the x axis keep the ranges exact
        points = np.zeros((1, 7, 3))
        points[0, :, 0] = [4.0, 4.5, 4.5, 5.0, 5.5, 6.5, 6.5]
        mask = laser_edge_mask(OrganizedScan(points, np.ones((1, 7), dtype=bool)), params)
        # column 2: right neighbour is exactly epsilon deeper, which is not farther
        assert not mask[0, 2]
        # column 4: left neighbour exactly epsilon nearer counts as same depth
        assert mask[0, 4]

    def test_invalid_neighbour_disqualifies(self):
        """A missing return inside the window removes the candidate."""
        params = LaserEdgeParams(k=2, epsilon=0.3, wrap=False)
        valid = np.ones((1, 8), dtype=bool)
        valid[0, 1] = False
        mask = laser_edge_mask(scan_from_ranges([5, 5, 5, 5, 10, 10, 10, 10], valid), params)
        assert not mask.any()

    def test_output_keeps_all_valid_points(self):
        """Every valid point is in the output cloud, with ring labels."""
        valid = np.ones((2, 10), dtype=bool)
        valid[1, 3] = False
        cloud = detect_laser_edges(scan_from_ranges(np.full((2, 10), 3.0), valid))
        assert len(cloud) == 19
        assert cloud.ring.tolist().count(1) == 9

    def test_reversal_invariance(self):
        """Reversing column order reverses the flags."""
        rng = np.random.default_rng(8)
        for wrap in (True, False):
            params = LaserEdgeParams(k=3, epsilon=0.3, wrap=wrap)
            ranges = blocky_ranges(rng, 6, 64)
            forward = laser_edge_mask(scan_from_ranges(ranges), params)
            backward = laser_edge_mask(scan_from_ranges(ranges[:, ::-1]), params)
            assert np.array_equal(forward, backward[:, ::-1])

    def test_far_side_never_flagged(self):
        """No farther point inside a flagged point's window is flagged."""
        rng = np.random.default_rng(21)
        params = LaserEdgeParams(k=3, epsilon=0.3, wrap=False)
        ranges = blocky_ranges(rng, 8, 128)
        mask = laser_edge_mask(scan_from_ranges(ranges), params)
        assert mask.any()
        for ring, col in zip(*np.nonzero(mask), strict=True):
            lo, hi = max(0, col - params.k), min(ranges.shape[1], col + params.k + 1)
            for other in range(lo, hi):
                if ranges[ring, other] > ranges[ring, col] + params.epsilon:
                    assert not mask[ring, other]

    def test_too_few_columns(self):
        """Rings need more than 2k columns."""
        with pytest.raises(InvalidArgumentError):
            laser_edge_mask(scan_from_ranges(np.full((1, 6), 5.0)), LaserEdgeParams(k=3))

    def test_params_validation(self):
        """k >= 1 and epsilon > 0."""
        with pytest.raises(ValidationError):
            LaserEdgeParams(k=0)
        with pytest.raises(ValidationError):
            LaserEdgeParams(epsilon=0.0)


class TestEdgeStats:
    """Tests for edge_stats()."""

    def test_no_flags(self):
        """No flags give zero counts."""
        stats = edge_stats(PointCloud(np.ones((4, 3))))
        assert stats.edges == 0
        assert stats.fraction == 0.0
        assert stats.per_ring == {}

    def test_all_flags(self):
        """All flags give a fraction of one."""
        stats = edge_stats(PointCloud(np.ones((4, 3)), np.ones(4, dtype=bool)))
        assert stats.fraction == 1.0

    def test_per_ring_counts(self):
        """Counts are grouped by ring label."""
        cloud = PointCloud(np.ones((5, 3)), np.array([1, 1, 0, 1, 0], bool), np.array([0, 0, 1, 2, 2]))
        assert edge_stats(cloud).per_ring == {0: 2, 2: 1}

    def test_empty_cloud(self):
        """An empty cloud has a zero fraction."""
        assert edge_stats(PointCloud(np.zeros((0, 3)))).fraction == 0.0
