"""Main entry point for the ``trical`` command line.

Subcommands: ``synth``, ``calibrate-laser``, ``calibrate-thermal``,
``evaluate`` and ``overlay``. Expected failures exit with the code carried
by their exception class; anything else exits 1.
"""

import argparse
import sys
from collections.abc import Sequence

from src.commands import (
    cmd_calibrate_laser,
    cmd_calibrate_thermal,
    cmd_evaluate,
    cmd_overlay,
    cmd_synth,
)
from src.config import load_settings
from src.core.logging import clear_context, configure_logging, get_logger
from src.exceptions import CalibrationError
from src.geometry import EulerPose
from src.renderer import OverlayMode
from src.synth import PRESETS

logger = get_logger(__name__)


def _euler(text: str) -> EulerPose:
    try:
        return EulerPose.from_values(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(
            f"expected six comma-separated numbers x,y,z,roll_deg,pitch_deg,yaw_deg: {e}"
        ) from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trical", description="Targetless stereo / laser / thermal extrinsic calibration"
    )
    parser.add_argument("--config", type=str, default=None, help="TOML configuration file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="Override one configuration value (repeatable)",
    )
    parser.add_argument(
        "--log-level",
        type=str.upper,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default=None,
        help="Logging level (overrides configuration)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="Generate a synthetic dataset")
    synth.add_argument("output", type=str, help="Dataset directory to write")
    source = synth.add_mutually_exclusive_group()
    source.add_argument("--spec", type=str, default=None, help="Scene file (.json or .toml)")
    source.add_argument("--preset", type=str, choices=sorted(PRESETS), default=None, help="Named scene")
    synth.add_argument("--frames", type=int, default=4, help="Number of frames")
    synth.add_argument("--seed", type=int, default=None, help="Replace the scene seed")
    synth.add_argument("--workers", type=int, default=1, help="Frames rendered in parallel")

    laser = sub.add_parser("calibrate-laser", help="Estimate T_SL by multi-frame ICP")
    laser.add_argument("dataset", type=str, help="Dataset directory")
    laser.add_argument("--init", type=_euler, default=None, help="x,y,z,roll,pitch,yaw (m, deg)")
    laser.add_argument("--output", type=str, default=None, help="Result file")

    thermal = sub.add_parser("calibrate-thermal", help="Estimate T_ST by edge alignment")
    thermal.add_argument("dataset", type=str, help="Dataset directory")
    thermal.add_argument("--init", type=_euler, default=None, help="x,y,z,roll,pitch,yaw (m, deg)")
    thermal.add_argument("--laser-calib", type=str, default=None, help="T_SL result file")
    thermal.add_argument("--output", type=str, default=None, help="Result file")

    evaluate = sub.add_parser("evaluate", help="Compare a result with ground truth")
    evaluate.add_argument("result", type=str, help="Calibration result file")
    evaluate.add_argument("--truth", type=str, required=True, help="ground_truth.json")
    evaluate.add_argument("--output", type=str, default=None, help="Report file")

    overlay = sub.add_parser("overlay", help="Draw projected points on a frame image")
    overlay.add_argument("dataset", type=str, help="Dataset directory")
    overlay.add_argument("--frame", type=str, required=True, help="Frame id")
    overlay.add_argument(
        "--mode",
        type=str,
        choices=[m.value for m in OverlayMode],
        default=OverlayMode.LASER_ON_RGB.value,
        help="What to project onto which image",
    )
    overlay.add_argument("--laser-calib", type=str, default=None, help="T_SL result file")
    overlay.add_argument("--thermal-calib", type=str, default=None, help="T_ST result file")
    overlay.add_argument("--depth-max", type=float, default=None, help="Farthest marked point (m)")
    overlay.add_argument("--output", type=str, default=None, help="Overlay PNG path")
    return parser


def run(args: argparse.Namespace) -> None:
    overrides = list(args.overrides)
    if args.log_level:
        overrides.append(f"logging.level={args.log_level}")
    settings = load_settings(args.config, overrides)
    configure_logging(settings.logging.level, settings.logging.json_output)

    if args.command == "synth":
        cmd_synth(args.output, args.spec, args.preset, args.frames, args.seed, args.workers)
    elif args.command == "calibrate-laser":
        cmd_calibrate_laser(args.dataset, settings, args.init, args.output)
    elif args.command == "calibrate-thermal":
        cmd_calibrate_thermal(args.dataset, settings, args.init, args.laser_calib, args.output)
    elif args.command == "evaluate":
        cmd_evaluate(args.result, args.truth, args.output)
    elif args.command == "overlay":
        cmd_overlay(
            args.dataset,
            args.frame,
            args.mode,
            settings,
            laser_calib=args.laser_calib,
            thermal_calib=args.thermal_calib,
            depth_max=args.depth_max,
            output=args.output,
        )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level or "INFO")
    try:
        run(args)
    except CalibrationError as e:
        logger.error("command_failed", command=args.command, error=str(e), kind=type(e).__name__)
        return e.exit_code
    except Exception:
        logger.exception("unexpected_error", command=args.command)
        return 1
    finally:
        clear_context()
    return 0


if __name__ == "__main__":
    sys.exit(main())
