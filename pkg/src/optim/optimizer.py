"""Damped Gauss-Newton (Levenberg-Marquardt) solver over a single SE(3) pose.

Residual blocks supply residual vectors and, optionally, analytic Jacobians with
respect to a left perturbation ``T <- exp(delta) @ T``. Blocks without a Jacobian
are differentiated numerically.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Protocol, runtime_checkable

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from src.core.logging import get_logger
from src.exceptions import InvalidArgumentError, SolverStalledError
from src.geometry.se3 import Pose, exp_map

logger = get_logger(__name__)

MAX_DAMPING = 1e12
ZERO_COST = 1e-30

Residual = NDArray[np.float64]
Jacobian = NDArray[np.float64]
ArrayLikeResidual = NDArray[np.float64] | Sequence[float] | float


@runtime_checkable
class ResidualBlock(Protocol):
    def evaluate(self, pose: Pose, with_jacobian: bool = True) -> tuple[Residual, Jacobian | None]:
        """Residual vector (m,) and optionally its m x 6 Jacobian at ``pose``."""
        ...


@dataclass(frozen=True)
class CallableBlock:
    """Adapts a plain ``pose -> residual`` function (and optional Jacobian) into a block."""

    residual_fn: Callable[[Pose], ArrayLikeResidual]
    jacobian_fn: Callable[[Pose], NDArray[np.float64]] | None = None

    def evaluate(self, pose: Pose, with_jacobian: bool = True) -> tuple[Residual, Jacobian | None]:
        r = np.atleast_1d(np.asarray(self.residual_fn(pose), dtype=np.float64)).ravel()
        if with_jacobian and self.jacobian_fn is not None:
            return r, np.asarray(self.jacobian_fn(pose), dtype=np.float64).reshape(len(r), 6)
        return r, None


class SolveOptions(BaseModel):
    """Stopping criteria and damping schedule start."""

    model_config = ConfigDict(frozen=True)

    max_iterations: int = Field(default=50, gt=0)
    initial_damping: float = Field(default=1e-4, gt=0)
    cost_tolerance: float = Field(default=1e-8, gt=0, description="Relative cost decrease")
    step_tolerance: float = Field(default=1e-10, gt=0, description="Twist norm of a step")


class TerminationReason(StrEnum):
    COST_TOLERANCE = "cost_tolerance"
    STEP_TOLERANCE = "step_tolerance"
    MAX_ITERATIONS = "max_iterations"
    STALLED = "stalled"


@dataclass
class SolveReport:
    pose: Pose
    cost_trace: list[float] = field(default_factory=list)
    termination: TerminationReason = TerminationReason.MAX_ITERATIONS
    iterations: int = 0
    rejected_steps: int = 0
    damping: float = 0.0

    @property
    def initial_cost(self) -> float:
        return self.cost_trace[0]

    @property
    def final_cost(self) -> float:
        return self.cost_trace[-1]


def finite_difference_jacobian(block: ResidualBlock, x: Pose, step: float = 1e-6) -> Jacobian:
    """Central differences along the six left-perturbation directions."""
    if step <= 0:
        raise InvalidArgumentError("finite-difference step must be positive")
    columns = []
    for i in range(6):
        delta = np.zeros(6)
        delta[i] = step
        r_plus, _ = block.evaluate(exp_map(delta) @ x, with_jacobian=False)
        r_minus, _ = block.evaluate(exp_map(-delta) @ x, with_jacobian=False)
        columns.append((r_plus - r_minus) / (2.0 * step))
    return np.column_stack(columns)


def _stack(blocks: Sequence[ResidualBlock], pose: Pose, with_jacobian: bool) -> tuple[Residual, Jacobian | None]:
    residuals = []
    jacobians = []
    for block in blocks:
        r, j = block.evaluate(pose, with_jacobian=with_jacobian)
        residuals.append(np.asarray(r, dtype=np.float64).ravel())
        if with_jacobian:
            jacobians.append(j if j is not None else finite_difference_jacobian(block, pose))
    r_all = np.concatenate(residuals) if residuals else np.zeros(0)
    if not with_jacobian:
        return r_all, None
    return r_all, np.vstack(jacobians) if jacobians else np.zeros((0, 6))


def _damped_step(jac: Jacobian, res: Residual, damping: float) -> NDArray[np.float64]:
    h = jac.T @ jac
    g = jac.T @ res
    a = h + damping * np.diag(np.diag(h) + 1e-12)
    try:
        return -cho_solve(cho_factor(a), g)
    except LinAlgError:
        return -np.linalg.lstsq(a, g, rcond=None)[0]


def solve(
    blocks: Sequence[ResidualBlock], x0: Pose, opts: SolveOptions | None = None
) -> SolveReport:
    """Minimise the summed squared residuals of ``blocks`` over a pose.

    The cost is ``sum(r**2)``; accepted steps strictly decrease it. Damping is
    halved on acceptance and doubled on rejection. When the first proposal of an
    iteration is rejected and its step or predicted decrease is negligible, the
    solve ends with ``step_tolerance``. Otherwise rejections continue until the
    damping exceeds ``1e12`` and :class:`SolverStalledError` carries the best pose.
    """
    if not blocks:
        raise InvalidArgumentError("solve needs at least one residual block")
    opts = opts or SolveOptions()

    pose = x0
    res, jac = _stack(blocks, pose, with_jacobian=True)
    cost = float(res @ res)
    report = SolveReport(pose=pose, cost_trace=[cost], damping=opts.initial_damping)
    if cost <= ZERO_COST:
        report.termination = TerminationReason.COST_TOLERANCE
        return report

    damping = opts.initial_damping
    for iteration in range(1, opts.max_iterations + 1):
        report.iterations = iteration
        first = True
        while True:
            delta = _damped_step(jac, res, damping)
            step_norm = float(np.linalg.norm(delta))
            candidate = exp_map(delta) @ pose
            new_res, _ = _stack(blocks, candidate, with_jacobian=False)
            new_cost = float(new_res @ new_res)
            if new_cost < cost:
                break
            report.rejected_steps += 1
            if first:
                # Gauss-Newton model decrease of this step
                predicted = -(2.0 * float(delta @ (jac.T @ res)) + float(np.sum((jac @ delta) ** 2)))
                if step_norm < opts.step_tolerance or predicted < opts.cost_tolerance * cost:
                    report.termination = TerminationReason.STEP_TOLERANCE
                    report.damping = damping
                    return report
                first = False
            damping *= 2.0
            if damping > MAX_DAMPING:
                report.termination = TerminationReason.STALLED
                report.damping = damping
                raise SolverStalledError(pose, report, f"all steps rejected at cost {cost:.6g}")

        relative = (cost - new_cost) / cost
        pose, cost = candidate, new_cost
        res, jac = _stack(blocks, pose, with_jacobian=True)
        report.pose = pose
        report.cost_trace.append(cost)
        damping *= 0.5
        logger.debug("lm_step_accepted", iteration=iteration, cost=cost, step=step_norm)
        if cost <= ZERO_COST or relative < opts.cost_tolerance:
            report.termination = TerminationReason.COST_TOLERANCE
            break
        if step_norm < opts.step_tolerance:
            report.termination = TerminationReason.STEP_TOLERANCE
            break
    else:
        report.termination = TerminationReason.MAX_ITERATIONS

    report.damping = damping
    return report
