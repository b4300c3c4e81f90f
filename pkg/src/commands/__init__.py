"""Command implementations behind the ``trical`` CLI."""

from src.commands.calibrate import cmd_calibrate_laser, cmd_calibrate_thermal
from src.commands.evaluate import cmd_evaluate, pose_errors
from src.commands.overlay import cmd_overlay
from src.commands.synth import cmd_synth, load_scene_spec

__all__ = [
    "cmd_calibrate_laser",
    "cmd_calibrate_thermal",
    "cmd_evaluate",
    "cmd_overlay",
    "cmd_synth",
    "load_scene_spec",
    "pose_errors",
]
