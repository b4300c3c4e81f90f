"""Tests for layered configuration loading."""

import pytest

from src.config import Settings, load_settings, parse_override
from src.exceptions import ConfigError


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "calib.toml"
    path.write_text(
        "[icp]\ninitial_gate = 2.0\ngate_floor = 0.3\n\n[reae]\ninlier_threshold = 8.0\n\n"
        "[logging]\nlevel = \"WARNING\"\n"
    )
    return path


class TestDefaults:
    """Tests for the default settings."""

    def test_defaults(self):
        """Defaults match the documented values."""
        settings = load_settings(env={})
        assert settings.solver.max_iterations == 50
        assert settings.stereo.sobel_threshold == 100.0
        assert settings.laser_edges.k == 3
        assert settings.thermal_edges.min_length == 50
        assert settings.icp.gate_decay == 0.9
        assert settings.reae.rotation_grid_deg == 1.0
        assert settings.logging.level == "INFO"

    def test_snapshot_is_json_ready(self):
        """The snapshot holds every group as plain values."""
        snapshot = Settings().snapshot()
        assert set(snapshot) == {
            "solver",
            "stereo",
            "laser_edges",
            "thermal_edges",
            "icp",
            "reae",
            "overlay",
            "logging",
        }
        assert snapshot["reae"]["inlier_threshold"] == 10.0


class TestLayering:
    """Tests for source precedence."""

    def test_toml_over_defaults(self, config_file):
        """TOML values replace defaults; other keys keep theirs."""
        settings = load_settings(config_file, env={})
        assert settings.icp.initial_gate == 2.0
        assert settings.icp.gate_decay == 0.9
        assert settings.reae.inlier_threshold == 8.0

    def test_env_over_toml(self, config_file):
        """Environment variables beat the file."""
        settings = load_settings(config_file, env={"CALIB_REAE_INLIER_THRESHOLD": "6.5"})
        assert settings.reae.inlier_threshold == 6.5

    def test_override_over_env(self, config_file):
        """Command-line overrides beat everything."""
        settings = load_settings(
            config_file,
            overrides=["reae.inlier_threshold=4"],
            env={"CALIB_REAE_INLIER_THRESHOLD": "6.5"},
        )
        assert settings.reae.inlier_threshold == 4.0

    def test_log_level_alias(self):
        """CALIB_LOG_LEVEL sets the logging level."""
        assert load_settings(env={"CALIB_LOG_LEVEL": "debug"}).logging.level == "DEBUG"

    def test_boolean_from_env(self):
        """String booleans are coerced."""
        settings = load_settings(env={"CALIB_THERMAL_EDGES_REMOVE_CLUTTERED": "false"})
        assert settings.thermal_edges.remove_cluttered is False

    def test_env_file(self, tmp_path, monkeypatch):
        """A .env file feeds the environment without overriding it."""
        env_file = tmp_path / ".env"
        env_file.write_text("CALIB_OVERLAY_DEPTH_MAX=25\n")
        # registers the variable so monkeypatch removes it again afterwards
        monkeypatch.setenv("CALIB_OVERLAY_DEPTH_MAX", "0")
        monkeypatch.delenv("CALIB_OVERLAY_DEPTH_MAX")
        settings = load_settings(env_file=env_file)
        assert settings.overlay.depth_max == 25.0


class TestErrors:
    """Tests for configuration failures."""

    def test_missing_file(self, tmp_path):
        """A missing config file is a ConfigError."""
        with pytest.raises(ConfigError, match="not found"):
            load_settings(tmp_path / "nope.toml", env={})

    def test_bad_toml(self, tmp_path):
        """Unparseable TOML is a ConfigError."""
        path = tmp_path / "bad.toml"
        path.write_text("[icp\n")
        with pytest.raises(ConfigError):
            load_settings(path, env={})

    def test_top_level_scalar(self, tmp_path):
        """Keys must live in sections."""
        path = tmp_path / "flat.toml"
        path.write_text("seed = 3\n")
        with pytest.raises(ConfigError, match="section"):
            load_settings(path, env={})

    def test_unknown_key(self):
        """Unknown keys are rejected."""
        with pytest.raises(ConfigError, match="icp.gate_speed"):
            load_settings(overrides=["icp.gate_speed=2"], env={})

    def test_out_of_range(self):
        """Values outside their bounds are rejected."""
        with pytest.raises(ConfigError):
            load_settings(overrides=["laser_edges.k=0"], env={})

    def test_cross_field_rule(self):
        """A gate floor above the initial gate is rejected."""
        with pytest.raises(ConfigError):
            load_settings(overrides=["icp.gate_floor=5"], env={})

    @pytest.mark.parametrize("text", ["icp", "icp.gate", "=3", "gate=3", ".gate=3"])
    def test_malformed_override(self, text):
        """Overrides need section.key=value."""
        with pytest.raises(ConfigError):
            parse_override(text)

    def test_override_keeps_equals_in_value(self):
        """Only the first '=' splits."""
        assert parse_override("logging.level=a=b") == ("logging", "level", "a=b")
