"""Levenberg-Marquardt solver over SE(3) poses."""

from .optimizer import (
    CallableBlock,
    ResidualBlock,
    SolveOptions,
    SolveReport,
    TerminationReason,
    finite_difference_jacobian,
    solve,
)

__all__ = [
    "CallableBlock",
    "ResidualBlock",
    "SolveOptions",
    "SolveReport",
    "TerminationReason",
    "finite_difference_jacobian",
    "solve",
]
