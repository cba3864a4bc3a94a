# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import logging
import math
from collections.abc import Sequence

import numpy as np

from srocmeta.data.records import Dataset, LogitStudy
from srocmeta.model.likelihood import (
    LOWER_BOUNDS,
    N_PARAMS,
    UPPER_BOUNDS,
    Criterion,
    LikelihoodModel,
    Method,
    NotPositiveDefiniteError,
    SingularInformationError,
    Theta,
    design_matrix,
)
from srocmeta.model.numdiff import DifferentiationError
from srocmeta.model.within import WithinCov

from .config import FitConfig
from .optimize import OptimizeOutcome, optimize
from .result import FitResult

logger = logging.getLogger(__name__)

MIN_START_VARIANCE: float = 1e-3
START_JITTER: float = 0.1
MAX_HESSIAN_CONDITION: float = 1e13


class FitError(ArithmeticError):
    pass


class FitPreconditionError(ValueError):
    pass


def ols_start(studies: Sequence[LogitStudy]) -> Theta:
    """
    Starting values from pooled ordinary least squares.

    Between-study variances start at half the variance of the per-study mean
    residuals of each outcome type, floored at MIN_START_VARIANCE; rho starts at 0.
    """
    z = np.vstack([design_matrix(s.thresholds) for s in studies])
    y = np.concatenate([np.concatenate([s.y1, s.y0]) for s in studies])
    beta, *_ = np.linalg.lstsq(z, y, rcond=None)
    beta = np.clip(beta, LOWER_BOUNDS[:4], UPPER_BOUNDS[:4])
    r1, r0 = [], []
    for s in studies:
        fitted = design_matrix(s.thresholds) @ beta
        r1.append(float(np.mean(s.y1 - fitted[: s.m])))
        r0.append(float(np.mean(s.y0 - fitted[s.m :])))
    tau1_sq = max(0.5 * float(np.var(r1, ddof=1)), MIN_START_VARIANCE)
    tau0_sq = max(0.5 * float(np.var(r0, ddof=1)), MIN_START_VARIANCE)
    return Theta(*beta, tau1_sq, tau0_sq, 0.0)


def multistart_points(start: Theta, count: int) -> list[Theta]:
    """
    Deterministic start points around `start`.

    Point s >= 1 scales beta by 1 + 0.1 (odd s) or 1 - 0.1 (even s) and the
    between-study variances by 0.5 (odd s) or 2 (even s).
    """
    acc = [start]
    base = start.to_array()
    for s in range(1, count):
        odd = s % 2 == 1
        x = base.copy()
        x[:4] *= 1.0 + (START_JITTER if odd else -START_JITTER)
        x[4:6] = np.maximum(x[4:6] * (0.5 if odd else 2.0), MIN_START_VARIANCE)
        acc.append(Theta.from_array(np.clip(x, LOWER_BOUNDS, UPPER_BOUNDS)))
    return acc


def boundary_flags(theta: Theta, eps: float) -> dict[str, bool]:
    return {
        "alpha1": False,
        "alpha0": False,
        "gamma1": False,
        "gamma0": False,
        "tau1_sq": theta.tau1_sq < eps,
        "tau0_sq": theta.tau0_sq < eps,
        "rho": abs(theta.rho) > 1.0 - eps,
    }


def robust_cov(
    model: LikelihoodModel, theta: Theta, criterion: Criterion = Criterion.ML
) -> np.ndarray:
    """
    Sandwich covariance H^-1 (S^T S) H^-1 from the Hessian H of the objective
    and the K x 7 matrix S of per-study scores.

    :raises SingularInformationError: The Hessian is numerically singular.
    """
    h = model.hessian(theta, criterion)
    if not np.all(np.isfinite(h)) or np.linalg.cond(h) > MAX_HESSIAN_CONDITION:
        raise SingularInformationError("Hessian of the objective is numerically singular")
    scores = model.scores(theta, criterion)
    h_inv = np.linalg.inv(h)
    cov = h_inv @ (scores.T @ scores) @ h_inv
    return (cov + cov.T) / 2


def sandwich_cov(
    theta_hat: Theta,
    data: Dataset,
    mode: Method,
    criterion: Criterion = Criterion.ML,
    within: Sequence[WithinCov] | None = None,
) -> np.ndarray:
    return robust_cov(LikelihoodModel.for_dataset(data, mode, within), theta_hat, criterion)


def hessian_cov(
    model: LikelihoodModel, theta: Theta, criterion: Criterion = Criterion.ML
) -> np.ndarray:
    """Model-based covariance -H^-1."""
    h = model.hessian(theta, criterion)
    if not np.all(np.isfinite(h)) or np.linalg.cond(h) > MAX_HESSIAN_CONDITION:
        raise SingularInformationError("Hessian of the objective is numerically singular")
    cov = -np.linalg.inv(h)
    return (cov + cov.T) / 2


def check_preconditions(data: Dataset) -> None:
    if data.n_studies < 2:
        raise FitPreconditionError(
            f"At least 2 studies are required, got {data.n_studies}"
        )
    if len(data.registry) < 2:
        raise FitPreconditionError(
            "At least 2 distinct threshold values are required to identify the slopes"
        )


def fit(
    data: Dataset,
    config: FitConfig | None = None,
    within: Sequence[WithinCov] | None = None,
) -> FitResult:
    """
    Estimate the model parameters and their sandwich covariance.

    Non-convergence does not raise; read `converged` on the result.

    :param data: Validated dataset.
    :param config: Estimation settings.
    :param within: Optional precomputed within-study covariances.
    :raises FitPreconditionError: Too few studies or distinct thresholds.
    :raises FitError: The objective cannot be evaluated at any start point.
    """
    config = config or FitConfig()
    check_preconditions(data)
    model = LikelihoodModel.for_dataset(data, config.method, within)

    def objective(x: np.ndarray) -> float:
        return model.objective(x, config.criterion)

    best: OptimizeOutcome | None = None
    for i, start in enumerate(multistart_points(ols_start(data.studies), config.multistart)):
        try:
            value = objective(start.to_array())
        except (NotPositiveDefiniteError, SingularInformationError) as e:
            logger.debug("Start %d not evaluable: %s", i, e)
            continue
        if not math.isfinite(value):
            logger.debug("Start %d has a non-finite objective", i)
            continue
        logger.debug("Start %d: %s objective=%.6f", i, start, value)
        outcome = optimize(objective, start, config)
        logger.debug(
            "Start %d ended %s after %d iterations, objective=%.8f",
            i,
            outcome.status,
            outcome.iterations,
            outcome.objective,
        )
        if best is None or outcome.objective > best.objective:
            best = outcome
    if best is None:
        raise FitError("Objective is not evaluable at any start point")

    j_singular = False
    try:
        cov = robust_cov(model, best.theta, config.criterion)
    except (SingularInformationError, NotPositiveDefiniteError, DifferentiationError) as e:
        logger.debug("No sandwich covariance: %s", e)
        j_singular = True
        cov = np.full((N_PARAMS, N_PARAMS), np.nan)

    return FitResult(
        theta=best.theta,
        cov=cov,
        objective=best.objective,
        converged=best.converged,
        boundary_flags=boundary_flags(best.theta, config.boundary_eps),
        method=config.method,
        criterion=config.criterion,
        iterations=best.iterations,
        status=best.status,
        level=config.level,
        n_studies=data.n_studies,
        registry=data.registry,
        j_singular=j_singular,
    )


def classify_failure(result: FitResult, config: FitConfig | None = None) -> bool:
    """
    True when the fit counts as a failure: not converged, a between-study
    variance within boundary_eps of 0, |rho| within boundary_eps of 1, or a
    singular Hessian.
    """
    eps = (config or FitConfig()).boundary_eps
    theta = result.theta
    return (
        not result.converged
        or min(theta.tau1_sq, theta.tau0_sq) < eps
        or abs(theta.rho) > 1.0 - eps
        or result.j_singular
    )
