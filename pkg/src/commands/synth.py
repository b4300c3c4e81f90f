"""``synth`` command: write a synthetic dataset from a scene file or a preset."""

from __future__ import annotations

import tomllib
from pathlib import Path

from pydantic import ValidationError

from src.core.logging import bind_context, get_logger
from src.exceptions import ConfigError, DataValidationError, ParseError
from src.io import read_json
from src.synth import SceneSpec, generate, preset

logger = get_logger(__name__)


def load_scene_spec(path: Path | str) -> SceneSpec:
    """Read a scene from ``.json`` or ``.toml``."""
    path = Path(path)
    if path.suffix.lower() == ".toml":
        if not path.exists():
            raise ConfigError(f"scene file not found: {path}")
        try:
            with path.open("rb") as fh:
                raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as e:
            raise ParseError(path, getattr(e, "lineno", 0), str(e)) from e
    else:
        raw = read_json(path)
    try:
        return SceneSpec.model_validate(raw)
    except ValidationError as e:
        raise DataValidationError(f"{path}: {e}") from e


def cmd_synth(
    out_dir: Path | str,
    spec_path: Path | str | None = None,
    preset_name: str | None = None,
    n_frames: int = 4,
    seed: int | None = None,
    workers: int = 1,
) -> Path:
    """Generate ``n_frames`` captures; a given ``seed`` replaces the scene's own."""
    bind_context(command="synth")
    if spec_path is not None:
        spec = load_scene_spec(spec_path)
    else:
        spec = preset(preset_name or "box_on_wall")
    if seed is not None:
        spec = spec.model_copy(update={"seed": seed})
    generate(spec, n_frames, out_dir, workers=workers)
    return Path(out_dir)
