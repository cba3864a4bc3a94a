# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import logging
from collections.abc import Callable
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from scipy import optimize as sciopt

from srocmeta.model import numdiff
from srocmeta.model.likelihood import LOWER_BOUNDS, UPPER_BOUNDS, Theta

from .config import FitConfig

logger = logging.getLogger(__name__)

# Stand-in for points where the objective cannot be evaluated; large enough
# that the line search always backs off from them.
PENALTY: float = 1e10
GRADIENT_TOL: float = 1e-6
MAX_LINE_SEARCH_STEPS: int = 40


class OptimizeStatus(StrEnum):
    CONVERGED = "converged"
    MAX_ITER = "max-iter"
    LINE_SEARCH_FAILURE = "line-search-failure"


@dataclass(frozen=True)
class OptimizeOutcome:
    theta: Theta
    status: OptimizeStatus
    iterations: int
    objective: float

    @property
    def converged(self) -> bool:
        return self.status == OptimizeStatus.CONVERGED


def penalized(objective: Callable[[np.ndarray], float]) -> Callable[[np.ndarray], float]:
    """Negate a maximization objective, mapping failures and non-finite values to PENALTY."""

    def f(x: np.ndarray) -> float:
        try:
            value = float(objective(x))
        except (ArithmeticError, np.linalg.LinAlgError):
            return PENALTY
        if not np.isfinite(value):
            return PENALTY
        return -value

    return f


def optimize(
    objective: Callable[[np.ndarray], float],
    start: Theta,
    config: FitConfig,
    lower: np.ndarray = LOWER_BOUNDS,
    upper: np.ndarray = UPPER_BOUNDS,
) -> OptimizeOutcome:
    """
    Maximize `objective` over the box [lower, upper] with L-BFGS-B.

    The gradient is taken by bound-aware finite differences. Never raises on
    numerical trouble; the outcome status says how the run ended.

    :param objective: Function of the 7-vector of parameters to maximize.
    :param start: Initial parameters, inside the box.
    :param config: Iteration limit and tolerances.
    :return: The best point reached with its status.
    """
    f = penalized(objective)
    x0 = np.clip(start.to_array(), lower, upper)
    f_start = f(x0)
    steps: list[float] = []
    last = [x0]

    def track(xk: np.ndarray) -> None:
        steps.append(float(np.max(np.abs(xk - last[0]))))
        last[0] = np.array(xk)

    res = sciopt.minimize(
        f,
        x0,
        method="L-BFGS-B",
        jac=lambda x: numdiff.jacobian(f, x, lower, upper),
        bounds=sciopt.Bounds(lower, upper),
        callback=track,
        options={
            "maxiter": config.max_iter,
            "ftol": config.objective_tol,
            "gtol": GRADIENT_TOL,
            "maxls": MAX_LINE_SEARCH_STEPS,
        },
    )
    x = np.clip(res.x, lower, upper)
    value = f(x)
    if res.status == 0:
        status = OptimizeStatus.CONVERGED
    elif res.status == 1:
        status = OptimizeStatus.MAX_ITER
    elif steps and steps[-1] < config.param_tol and value < PENALTY:
        # Line search stalled on a flat ridge after the parameters settled.
        status = OptimizeStatus.CONVERGED
    else:
        status = OptimizeStatus.LINE_SEARCH_FAILURE
    if value > f_start:
        logger.debug("Optimizer ended above its start; keeping the start point")
        x, value = x0, f_start
    logger.debug(
        "L-BFGS-B finished: status=%s nit=%d objective=%.10g (%s)",
        status,
        res.nit,
        -value,
        res.message,
    )
    return OptimizeOutcome(
        theta=Theta.from_array(x),
        status=status,
        iterations=int(res.nit),
        objective=-value,
    )
