"""Calibration settings with grouped models.

Values are layered, later sources winning:

1. model defaults
2. a TOML file (``[section] key = value``)
3. environment variables ``CALIB_<SECTION>_<KEY>`` (a ``.env`` file is loaded first)
4. ``section.key=value`` overrides from the command line

Configuration is organized into logical groups that mirror the pipeline stages.
"""

import logging
import os
import tomllib
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any, Literal

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.calib.mficp import IcpParams
from src.calib.reae import ReaeParams
from src.exceptions import ConfigError
from src.frontend.laser_edges import LaserEdgeParams
from src.frontend.thermal_edges import CannyParams
from src.optim import SolveOptions

logger = logging.getLogger(__name__)

ENV_PREFIX = "CALIB_"


# ===== Configuration Groups =====


class SolverConfig(SolveOptions):
    """Levenberg-Marquardt stopping criteria shared by both calibrations."""

    model_config = ConfigDict(frozen=True, extra="forbid")


class StereoConfig(BaseModel):
    """Triangulation pruning and Sobel edge tagging."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    sobel_threshold: float = Field(
        default=100.0, gt=0, description="Sobel magnitude threshold on the 8-bit scale"
    )
    max_depth: float = Field(default=80.0, gt=0, description="Farthest kept point in meters")
    min_parallax_rad: float = Field(
        default=1e-4, gt=0, description="Smallest triangulation angle in radians"
    )
    edge_tolerance_px: int = Field(
        default=1, ge=0, description="Chebyshev distance from a feature to an edge pixel"
    )


class LaserEdgeConfig(LaserEdgeParams):
    """Depth-discontinuity detection on laser rings."""

    model_config = ConfigDict(frozen=True, extra="forbid")


class ThermalEdgeConfig(CannyParams):
    """Canny parameters plus the short/cluttered component filter."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    cluttered_fill_ratio: float = Field(
        default=0.5, gt=0, le=1, description="Bounding-box fill ratio above which a component is clutter"
    )
    remove_cluttered: bool = Field(default=True, description="Apply the fill-ratio rule")


class IcpConfig(IcpParams):
    """Multi-frame ICP loop."""

    model_config = ConfigDict(frozen=True, extra="forbid")


class ReaeConfig(ReaeParams):
    """Edge-alignment loop and rough grid search."""

    model_config = ConfigDict(frozen=True, extra="forbid")


class OverlayConfig(BaseModel):
    """Diagnostic overlay rendering."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    depth_max: float = Field(default=10.0, ge=0, description="Only points nearer than this (m)")
    mark_radius: int = Field(default=1, ge=0, description="Mark radius in pixels")
    edge_distance_px: float = Field(
        default=2.0, ge=0, description="A mark within this distance counts as on an edge"
    )


class LoggingConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(default="INFO")
    json_output: bool = Field(default=False, description="One JSON object per log line")


# ===== Main Settings Class =====


class Settings(BaseModel):
    """All configuration groups; ``snapshot()`` is embedded in every result file."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    solver: SolverConfig = Field(default_factory=SolverConfig)
    stereo: StereoConfig = Field(default_factory=StereoConfig)
    laser_edges: LaserEdgeConfig = Field(default_factory=LaserEdgeConfig)
    thermal_edges: ThermalEdgeConfig = Field(default_factory=ThermalEdgeConfig)
    icp: IcpConfig = Field(default_factory=IcpConfig)
    reae: ReaeConfig = Field(default_factory=ReaeConfig)
    overlay: OverlayConfig = Field(default_factory=OverlayConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    def snapshot(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


def _section_fields() -> dict[str, set[str]]:
    return {
        name: set(info.annotation.model_fields)  # type: ignore[union-attr]
        for name, info in Settings.model_fields.items()
    }


def _merge(base: dict[str, Any], section: str, key: str, value: Any) -> None:
    base.setdefault(section, {})[key] = value


def _read_toml(path: Path) -> dict[str, Any]:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    for section, values in data.items():
        if not isinstance(values, dict):
            raise ConfigError(f"{path}: top-level key {section!r} must be a [section] table")
    return data


def _env_values(env: Mapping[str, str]) -> dict[str, Any]:
    found: dict[str, Any] = {}
    for section, keys in _section_fields().items():
        for key in keys:
            name = f"{ENV_PREFIX}{section}_{key}".upper()
            if name in env:
                _merge(found, section, key, env[name])
    # Short alias for the most common override
    if f"{ENV_PREFIX}LOG_LEVEL" in env:
        _merge(found, "logging", "level", env[f"{ENV_PREFIX}LOG_LEVEL"].upper())
    return found


def parse_override(text: str) -> tuple[str, str, str]:
    """Split ``section.key=value``."""
    target, sep, value = text.partition("=")
    section, dot, key = target.strip().partition(".")
    if not sep or not dot or not section or not key:
        raise ConfigError(f"override {text!r} is not of the form section.key=value")
    return section, key, value.strip()


def load_settings(
    config_path: Path | str | None = None,
    overrides: Iterable[str] = (),
    env: Mapping[str, str] | None = None,
    env_file: Path | str | None = None,
) -> Settings:
    """Assemble settings from defaults, a TOML file, the environment and CLI overrides."""
    if env is None:
        dotenv_path = Path(env_file) if env_file is not None else Path.cwd() / ".env"
        if dotenv_path.exists():
            load_dotenv(dotenv_path, override=False)
            logger.debug(f"Loaded environment from {dotenv_path}")
        env = os.environ

    data: dict[str, Any] = {}
    if config_path is not None:
        for section, values in _read_toml(Path(config_path)).items():
            for key, value in values.items():
                _merge(data, section, key, value)
    for section, values in _env_values(env).items():
        for key, value in values.items():
            _merge(data, section, key, value)
    for text in overrides:
        section, key, value = parse_override(text)
        _merge(data, section, key, value)

    try:
        return Settings.model_validate(data)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"invalid configuration: {problems}") from e
