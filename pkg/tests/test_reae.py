"""Tests for thermal calibration by edge alignment."""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from src.calib import (
    EdgeProjectionSet,
    ReaeBlock,
    ReaeParams,
    calibrate_thermal,
    outer_cost,
    project_laser_edge,
    project_stereo_edge,
    reae_cost,
    reae_jacobian_row,
    rough_calibrate,
    select_all_inliers,
    select_inliers,
)
from src.exceptions import DegenerateProblemError, InitializationOutOfRangeError, InvalidArgumentError
from src.frontend import build_attraction_field, sample_field
from src.geometry import (
    EulerPose,
    PinholeIntrinsics,
    Pose,
    exp_map,
    project,
    rotation_error_deg,
    translation_error_m,
)
from src.optim import finite_difference_jacobian

K_THERMAL = PinholeIntrinsics(fx=300, fy=300, cx=160, cy=120, width=320, height=240)
T_ST = EulerPose(x=0.12, y=0.08, z=0.02, roll_deg=1.0, pitch_deg=-0.8, yaw_deg=0.6).to_pose()
T_SL = Pose.from_translation([0.05, -0.2, 0.1])


def outline(u0: int, v0: int, u1: int, v1: int) -> np.ndarray:
    """Integer pixels on the border of a rectangle."""
    top = [(u, v0) for u in range(u0, u1 + 1)]
    bottom = [(u, v1) for u in range(u0, u1 + 1)]
    left = [(u0, v) for v in range(v0 + 1, v1)]
    right = [(u1, v) for v in range(v0 + 1, v1)]
    return np.array(top + bottom + left + right, dtype=np.float64)


def rectangle_frame(index: int, t_st: Pose = T_ST) -> EdgeProjectionSet:
    """Two rectangles at different depths whose outlines are the thermal edges."""
    rects = [
        ((40 + 10 * index, 30, 140 + 10 * index, 110), 4.0 + index),
        ((170, 120 + 5 * index, 290, 210), 7.0 - index),
    ]
    edges = np.zeros((K_THERMAL.height, K_THERMAL.width), dtype=bool)
    points = []
    for box, depth in rects:
        pix = outline(*box)
        edges[pix[:, 1].astype(int), pix[:, 0].astype(int)] = True
        points.append(depth * K_THERMAL.back_project(pix))
    stereo = t_st.transform_points(np.vstack(points))
    return EdgeProjectionSet(
        id=f"{index:04d}",
        stereo_edges=stereo[::2],
        laser_edges=T_SL.inverse().transform_points(stereo[1::2]),
        field=build_attraction_field(edges),
        k=K_THERMAL,
        t_sl=T_SL,
    )


@pytest.fixture
def bundle():
    return [rectangle_frame(i) for i in range(3)]


def random_field(seed: int):
    rng = np.random.default_rng(seed)
    return build_attraction_field(rng.random((K_THERMAL.height, K_THERMAL.width)) < 0.01)


def cell_centre_points(rng: np.random.Generator, t_ts: Pose, n: int) -> np.ndarray:
    """Stereo-frame points whose thermal projections land in the middle of a field cell."""
    uv = np.column_stack([rng.integers(2, K_THERMAL.width - 4, n), rng.integers(2, K_THERMAL.height - 4, n)]) + 0.5
    depth = rng.uniform(2.0, 20.0, n)[:, None]
    return t_ts.inverse().transform_points(depth * K_THERMAL.back_project(uv))


class TestProjection:
    """Tests for the edge projection helpers."""

    def test_laser_edge_matches_stereo_path(self):
        """Projecting a laser point equals projecting its stereo-frame image."""
        q = np.array([0.4, -0.3, 6.0])
        assert np.allclose(
            project_laser_edge(q, T_ST, T_SL, K_THERMAL),
            project_stereo_edge(T_SL.transform_point(q), T_ST, K_THERMAL),
            atol=1e-12,
        )

    def test_identity_rig(self):
        """With identity extrinsics both paths reduce to the pinhole projection."""
        q = np.array([0.4, -0.3, 6.0])
        identity = Pose.identity()
        assert np.allclose(project_laser_edge(q, identity, identity, K_THERMAL), project(K_THERMAL, q), atol=1e-12)

    def test_field_size_must_match_camera(self):
        """A field of another size is rejected."""
        field = build_attraction_field(np.eye(10, dtype=bool))
        with pytest.raises(InvalidArgumentError):
            EdgeProjectionSet("0000", np.zeros((1, 3)), np.zeros((0, 3)), field, K_THERMAL, T_SL)


class TestInliers:
    """Tests for select_inliers() and reae_cost()."""

    @pytest.fixture
    def linear_set(self):
        """Field G(u, v) = u with the principal point at (5, 6)."""
        k = PinholeIntrinsics(fx=100, fy=100, cx=5.0, cy=6.0, width=20, height=12)
        edges = np.zeros((12, 20), dtype=bool)
        edges[:, 0] = True
        stereo = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [10.0, 0.0, 1.0]])
        return EdgeProjectionSet("0000", stereo, np.zeros((0, 3)), build_attraction_field(edges), k, Pose.identity())

    def test_threshold_is_inclusive(self, linear_set):
        """A point exactly at the threshold is an inlier."""
        assert select_inliers(linear_set, Pose.identity(), 5.0).stereo.tolist() == [True, False, False]
        assert select_inliers(linear_set, Pose.identity(), 4.5).count == 0

    def test_truth_selects_everything(self, bundle):
        """At the true pose every edge point lies on an edge."""
        for s, sel in zip(bundle, select_all_inliers(bundle, T_ST, 0.5), strict=True):
            assert sel.count == len(s.points)

    def test_cost_matches_resummation(self, bundle):
        """The cost is the plain sum of field values over the frozen inliers."""
        pose = exp_map([0.02, -0.01, 0.0, 0.004, 0.0, -0.003]) @ T_ST
        inliers = select_all_inliers(bundle, pose, 10.0)
        expected = 0.0
        for s, sel in zip(bundle, inliers, strict=True):
            for p in s.points[sel.mask]:
                expected += sample_field(s.field, project_stereo_edge(p, pose, s.k))
        assert expected > 0
        assert reae_cost(bundle, pose, inliers) == pytest.approx(expected, rel=1e-12)

    def test_cost_without_inliers(self, linear_set):
        """An empty selection is degenerate."""
        with pytest.raises(DegenerateProblemError):
            reae_cost([linear_set], Pose.identity(), [select_inliers(linear_set, Pose.identity(), 1.0)])

    def test_outer_cost_caps_outliers(self, linear_set):
        """Usable points add min(G, th); the rest add th."""
        assert outer_cost([linear_set], Pose.identity(), 4.0) == pytest.approx(12.0)
        assert outer_cost([linear_set], Pose.identity(), 10.0) == pytest.approx(25.0)

    def test_outer_cost_is_inlier_cost_plus_outliers(self, bundle):
        """The capped cost splits into the frozen-inlier cost and th per outlier."""
        pose = exp_map([0.02, -0.01, 0.0, 0.004, 0.0, -0.003]) @ T_ST
        inliers = select_all_inliers(bundle, pose, 3.0)
        outliers = sum(len(s.points) - sel.count for s, sel in zip(bundle, inliers, strict=True))
        assert outliers > 0
        expected = reae_cost(bundle, pose, inliers) + 3.0 * outliers
        assert outer_cost(bundle, pose, 3.0) == pytest.approx(expected, rel=1e-12)


class TestJacobian:
    """Tests for the analytic REAE Jacobian."""

    def test_row_matches_finite_differences(self):
        """Per-point rows agree with central differences over 1000 configurations."""
        rng = np.random.default_rng(2024)
        field = random_field(1)
        h = 1e-6
        for _ in range(1000):
            t_ts = exp_map(rng.normal(scale=[0.1, 0.1, 0.1, 0.05, 0.05, 0.05]))
            point = cell_centre_points(rng, t_ts, 1)[0]
            numeric = np.empty(6)
            for i in range(6):
                delta = np.zeros(6)
                delta[i] = h
                plus = sample_field(field, project(K_THERMAL, (exp_map(delta) @ t_ts).transform_point(point)))
                minus = sample_field(field, project(K_THERMAL, (exp_map(-delta) @ t_ts).transform_point(point)))
                numeric[i] = (plus - minus) / (2 * h)
            analytic = reae_jacobian_row(point, field, K_THERMAL, t_ts)
            assert np.linalg.norm(analytic - numeric) <= 1e-4 * np.linalg.norm(analytic) + 1e-6

    def test_block_matches_finite_differences(self):
        """The block Jacobian agrees with the optimizer's finite differences."""
        rng = np.random.default_rng(7)
        t_ts = exp_map([0.05, -0.02, 0.03, 0.01, 0.02, -0.01])
        block = ReaeBlock(random_field(2), K_THERMAL, cell_centre_points(rng, t_ts, 200))
        _, analytic = block.evaluate(t_ts)
        numeric = finite_difference_jacobian(block, t_ts)
        assert np.linalg.norm(analytic - numeric) <= 1e-4 * np.linalg.norm(analytic)

    def test_clamped_point_has_zero_row(self):
        """Points outside the field contribute a zero row."""
        field = random_field(3)
        assert not reae_jacobian_row([0.0, 0.0, -5.0], field, K_THERMAL, Pose.identity()).any()
        assert not reae_jacobian_row([50.0, 0.0, 1.0], field, K_THERMAL, Pose.identity()).any()


class TestRoughCalibrate:
    """Tests for rough_calibrate()."""

    def test_truth_stays_put(self, bundle):
        """Starting at the truth returns a pose within one grid cell of it."""
        pose = rough_calibrate(bundle, T_ST)
        assert rotation_error_deg(pose, T_ST) <= 1.0
        assert translation_error_m(pose, T_ST) <= 0.04

    def test_recovers_yaw_offset(self, bundle):
        """A 5 degree yaw offset is removed by the rotation stage alone."""
        r_off = Rotation.from_euler("z", 5.0, degrees=True).as_matrix()
        init = Pose(r_off @ T_ST.rotation, T_ST.translation)

        pose = rough_calibrate(bundle, init, ReaeParams(inlier_threshold=1.5))

        assert rotation_error_deg(pose, T_ST) < 0.5
        assert np.array_equal(pose.translation, init.translation)

    def test_zero_threshold(self, bundle):
        """No point can be an inlier at a 0 px threshold."""
        with pytest.raises(DegenerateProblemError):
            rough_calibrate(bundle, T_ST, ReaeParams(inlier_threshold=0.0))

    def test_out_of_range(self, bundle):
        """An initial guess that sees nothing cannot be searched from."""
        init = Pose(T_ST.rotation, T_ST.translation + [0.0, 0.0, 50.0])
        with pytest.raises(InitializationOutOfRangeError):
            rough_calibrate(bundle, init)


class TestCalibrateThermal:
    """Tests for calibrate_thermal()."""

    def test_init_at_truth(self, bundle):
        """Starting at the truth converges immediately with a near-zero cost."""
        result = calibrate_thermal(bundle, T_ST)
        assert result.converged
        assert result.iterations <= 2
        assert result.trace[-1] < 1e-6
        assert result.target == "T_ST"

    def test_refines_small_offset(self, bundle):
        """Refinement alone removes a small offset."""
        init = exp_map([0.03, -0.02, 0.02, 0.003, -0.002, 0.004]) @ T_ST

        result = calibrate_thermal(bundle, init, ReaeParams(rough_calibration=False))

        assert rotation_error_deg(result.pose, T_ST) < 0.1
        assert translation_error_m(result.pose, T_ST) < 0.01
        assert result.trace[-1] < result.trace[0] or result.iterations == 1
        assert np.all(np.diff(result.trace) <= 0)
        for trace in result.solve_traces:
            assert np.all(np.diff(trace) <= 0)
        assert set(result.frame_residuals) == {"0000", "0001", "0002"}

    def test_trace_starts_at_initial_cost_and_never_rises(self, bundle):
        """The first entry is the capped cost of the start pose and accepted iterations only lower it."""
        init = exp_map([-0.04, 0.03, 0.01, -0.004, 0.003, 0.002]) @ T_ST
        params = ReaeParams(rough_calibration=False, inlier_threshold=6.0)

        result = calibrate_thermal(bundle, init, params)

        assert result.trace[0] == pytest.approx(outer_cost(bundle, init, 6.0), rel=1e-12)
        assert len(result.trace) <= result.iterations + 1
        assert np.all(np.diff(result.trace) <= 0)
        assert result.trace[-1] == pytest.approx(outer_cost(bundle, result.pose, 6.0), rel=1e-9, abs=1e-9)

    def test_no_edge_points(self):
        """Frames without any 3D edge point are degenerate."""
        empty = EdgeProjectionSet(
            "0000", np.zeros((0, 3)), np.zeros((0, 3)), random_field(4), K_THERMAL, T_SL
        )
        with pytest.raises(DegenerateProblemError):
            calibrate_thermal([empty], T_ST)

    def test_zero_threshold(self, bundle):
        """A 0 px threshold is rejected before any optimisation."""
        with pytest.raises(DegenerateProblemError):
            calibrate_thermal(bundle, T_ST, ReaeParams(inlier_threshold=0.0))
