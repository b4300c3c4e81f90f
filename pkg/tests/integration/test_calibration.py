"""End-to-end calibration on generated scenes with known extrinsics.

These tests render full datasets and run both calibrations many times, so
they are slow; select them with ``-m integration``.
"""

import json

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from src.calib import (
    CalibrationResult,
    ReaeParams,
    calibrate_laser,
    calibrate_thermal,
    rough_calibrate,
    save_result,
    select_all_inliers,
)
from src.commands import cmd_overlay
from src.commands.calibrate import LASER_RESULT_NAME
from src.commands.pipeline import edge_sets, icp_frames, load_frames
from src.config import Settings
from src.geometry import EulerPose, Pose, rotation_error_deg, translation_error_m
from src.io import load_dataset
from src.main import main
from src.synth import SUITE, NoiseSpec, SensorRig, generate, perturb_pose, preset

pytestmark = pytest.mark.integration

N_FRAMES = 4
SEEDS = range(20)
NOISY = NoiseSpec(laser_sigma=0.02, stereo_sigma=0.02)

# rotation, translation offsets of the initial guesses
LASER_OFFSETS = ((8.0, 12.0), (0.16, 0.24))
THERMAL_OFFSETS = ((4.0, 6.0), (0.08, 0.12))


def _render(root, name: str, noise: NoiseSpec):
    data = generate(preset(name, seed=100 + SUITE.index(name), noise=noise), N_FRAMES, root)
    dataset = load_dataset(root)
    return data, dataset, load_frames(dataset, require_matches=True)


@pytest.fixture(scope="module")
def noisy_icp(tmp_path_factory, settings):
    """ICP frames of every suite scene with 2 cm laser and stereo noise."""
    out = {}
    for name in SUITE:
        data, dataset, frames = _render(tmp_path_factory.mktemp(f"noisy_{name}"), name, NOISY)
        out[name] = (data, icp_frames(dataset, frames, settings))
    return out


@pytest.fixture(scope="module")
def clean_suite(tmp_path_factory, settings):
    """Noiseless suite scenes with their ICP frames and thermal edge bundles."""
    out = {}
    for name in SUITE:
        data, dataset, frames = _render(tmp_path_factory.mktemp(f"clean_{name}"), name, NoiseSpec())
        out[name] = (
            data,
            icp_frames(dataset, frames, settings),
            edge_sets(dataset, frames, data.t_sl, settings),
        )
    return out


class TestLaserCalibration:
    """Multi-frame ICP recovery of T_SL."""

    @pytest.mark.parametrize("seed", SEEDS)
    @pytest.mark.parametrize("name", SUITE)
    def test_noisy_recovery(self, noisy_icp, settings, name, seed):
        """8-12 deg / 16-24 cm offsets are recovered to 1 deg / 5 cm under 2 cm noise."""
        data, frames = noisy_icp[name]
        init = perturb_pose(data.t_sl, *LASER_OFFSETS, seed=seed)

        result = calibrate_laser(frames, init, settings.icp, settings.solver)

        assert result.termination != "stalled"
        assert rotation_error_deg(result.pose, data.t_sl) < 1.0
        assert translation_error_m(result.pose, data.t_sl) < 0.05

    @pytest.mark.parametrize("seed", range(3))
    @pytest.mark.parametrize("name", SUITE)
    def test_noiseless_recovery(self, clean_suite, settings, name, seed):
        """Without noise the recovery is tight."""
        data, frames, _ = clean_suite[name]
        init = perturb_pose(data.t_sl, (10.0, 10.0), (0.2, 0.2), seed=seed)

        result = calibrate_laser(frames, init, settings.icp, settings.solver)

        assert rotation_error_deg(result.pose, data.t_sl) < 0.05
        assert translation_error_m(result.pose, data.t_sl) < 0.01

    def test_truth_is_a_fixed_point(self, clean_suite, settings):
        """Starting at the truth stops within two outer iterations."""
        data, frames, _ = clean_suite[SUITE[0]]
        result = calibrate_laser(frames, data.t_sl, settings.icp, settings.solver)
        assert result.iterations <= 2
        assert rotation_error_deg(result.pose, data.t_sl) < 0.05


class TestThermalCalibration:
    """Edge-alignment recovery of T_ST."""

    @pytest.mark.parametrize("seed", SEEDS)
    @pytest.mark.parametrize("name", SUITE)
    def test_recovery_and_trace(self, clean_suite, settings, name, seed):
        """4-6 deg / 8-12 cm offsets are recovered to 0.5 deg / 4 cm within 20 outer iterations."""
        data, _, sets = clean_suite[name]
        init = perturb_pose(data.t_st, *THERMAL_OFFSETS, seed=seed)

        result = calibrate_thermal(sets, init, settings.reae, settings.solver)

        assert rotation_error_deg(result.pose, data.t_st) < 0.5
        assert translation_error_m(result.pose, data.t_st) < 0.04
        assert result.converged
        assert result.iterations <= 20
        assert np.all(np.diff(result.trace) <= 0)
        for trace in result.solve_traces:
            assert np.all(np.diff(trace) <= 0)

    @pytest.mark.parametrize("seed", range(3))
    @pytest.mark.parametrize("name", SUITE)
    def test_noiseless_recovery(self, clean_suite, settings, name, seed):
        """Without noise the edge alignment recovers T_ST to 0.05 deg / 1 cm."""
        data, _, sets = clean_suite[name]
        init = perturb_pose(data.t_st, *THERMAL_OFFSETS, seed=200 + seed)

        result = calibrate_thermal(sets, init, settings.reae, settings.solver)

        assert result.converged
        assert rotation_error_deg(result.pose, data.t_st) < 0.05
        assert translation_error_m(result.pose, data.t_st) < 0.01

    @pytest.mark.parametrize("name", SUITE)
    def test_truth_is_a_fixed_point(self, clean_suite, settings, name):
        """Starting at the truth stays there, with inliers sitting on the thermal edges."""
        data, _, sets = clean_suite[name]
        params = settings.reae.model_copy(update={"rough_calibration": False})

        result = calibrate_thermal(sets, data.t_st, params, settings.solver)

        assert result.converged
        assert result.iterations <= 2
        assert rotation_error_deg(result.pose, data.t_st) < 0.05
        assert translation_error_m(result.pose, data.t_st) < 0.01
        assert np.mean(list(result.frame_residuals.values())) < 1.0

    @pytest.mark.parametrize("trial", range(40))
    def test_rough_search_basin(self, clean_suite, trial):
        """Offsets up to the search half-ranges come back within one grid step on every axis."""
        data, _, sets = clean_suite[SUITE[trial % len(SUITE)]]
        params = ReaeParams()
        init = perturb_pose(
            data.t_st,
            (0.0, params.rotation_half_range_deg),
            (0.0, params.translation_half_range_m),
            seed=1000 + trial,
        )

        pose = rough_calibrate(sets, init, params)

        # per axis, in the offset convention the search uses
        r_err = Rotation.from_matrix(pose.rotation @ data.t_st.rotation.T).as_euler("ZYX", degrees=True)
        assert np.all(np.abs(r_err) <= params.rotation_grid_deg + 1e-9)
        assert np.all(np.abs(pose.translation - data.t_st.translation) <= params.translation_grid_m + 1e-9)

    def test_inliers_peak_at_truth(self, clean_suite, settings):
        """No pose 2 deg or 8 cm away sees more inliers than the truth."""
        data, _, sets = clean_suite[SUITE[1]]
        th = settings.reae.inlier_threshold
        at_truth = sum(sel.count for sel in select_all_inliers(sets, data.t_st, th))
        rng = np.random.default_rng(5)
        for _ in range(100):
            if rng.random() < 0.5:
                pose = perturb_pose(data.t_st, (2.0, 6.0), (0.0, 0.0), seed=rng.integers(1 << 31))
            else:
                pose = perturb_pose(data.t_st, (0.0, 0.0), (0.08, 0.12), seed=rng.integers(1 << 31))
            assert sum(sel.count for sel in select_all_inliers(sets, pose, th)) <= at_truth


class TestOverlay:
    """Overlays drawn with the true extrinsics."""

    def test_laser_edges_on_image_edges(self, tmp_path):
        """At the truth, laser edge marks land on image silhouettes."""
        rig = SensorRig(laser_columns=2048)
        data = generate(preset("box_on_wall", seed=9, rig=rig), 1, tmp_path)
        save_result(CalibrationResult(target="T_SL", pose=data.t_sl), tmp_path / LASER_RESULT_NAME)

        report = cmd_overlay(tmp_path, "0000", "laser-on-rgb", Settings())

        assert report["layers"]["laser edges"] > 0
        assert report["near_edge_fraction"] >= 0.95
        assert (tmp_path / "overlays" / "0000_laser-on-rgb.png").exists()


class TestCommandLine:
    """The documented workflow through the CLI."""

    def test_synth_calibrate_evaluate(self, tmp_path):
        """synth, calibrate-laser, calibrate-thermal and evaluate all succeed and meet tolerances."""
        root = tmp_path / "ds"
        assert main(["synth", str(root), "--preset", "suite_a", "--frames", "4", "--seed", "21"]) == 0
        assert main(["calibrate-laser", str(root)]) == 0
        assert main(["calibrate-thermal", str(root)]) == 0

        truth = str(root / "ground_truth.json")
        laser_report = tmp_path / "laser_eval.json"
        thermal_report = tmp_path / "thermal_eval.json"
        for name, report in (("laser_calib.json", laser_report), ("thermal_calib.json", thermal_report)):
            assert main(["evaluate", str(root / name), "--truth", truth, "--output", str(report)]) == 0

        laser = json.loads(laser_report.read_text())["result"]
        thermal = json.loads(thermal_report.read_text())["result"]
        assert laser["rotation_deg"] < 1.0 and laser["translation_cm"] < 5.0
        assert thermal["rotation_deg"] < 0.5 and thermal["translation_cm"] < 4.0

        result = json.loads((root / "thermal_calib.json").read_text())
        assert result["params"]["reae"]["inlier_threshold"] == 10.0
        matrix_pose = Pose.from_matrix(result["matrix"])
        assert rotation_error_deg(matrix_pose, EulerPose(**result["pose"]).to_pose()) < 1e-6
