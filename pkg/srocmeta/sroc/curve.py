# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

"""
Summary ROC curve, its delta-method variance and the area under it.

All functions take beta = (alpha1, alpha0, gamma1, gamma0). The curve maps a
false-positive rate t to expit(alpha1 + gamma1 * (logit(1 - t) - alpha0) / gamma0).
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import expit, logit

from srocmeta.fit.result import Transform, json_float, normal_quantile, wald_ci

logger = logging.getLogger(__name__)

QUAD_EPSABS: float = 1e-9
QUAD_LIMIT: int = 60
DEFAULT_GRID_SIZE: int = 101


class UndefinedCurveError(ArithmeticError):
    pass


class QuadratureError(ArithmeticError):
    def __init__(self, message: str, abserr: float) -> None:
        super().__init__(f"{message} (error estimate {abserr:.3g})")
        self.abserr = abserr


def _unpack(beta: Sequence[float] | np.ndarray) -> tuple[float, float, float, float]:
    a1, a0, g1, g0 = (float(b) for b in np.asarray(beta, dtype=float)[:4])
    if g0 == 0.0:
        raise UndefinedCurveError("gamma0 = 0; the summary ROC curve is undefined")
    return a1, a0, g1, g0


def _check_t(t: np.ndarray) -> None:
    if np.any(t <= 0.0) or np.any(t >= 1.0):
        raise ValueError("False-positive rates must lie strictly inside (0, 1)")


def _inner(t: np.ndarray, a0: float, g0: float) -> np.ndarray:
    return (logit(1.0 - t) - a0) / g0


def sroc_value(
    t: float | np.ndarray, beta: Sequence[float] | np.ndarray
) -> float | np.ndarray:
    a1, a0, g1, g0 = _unpack(beta)
    tt = np.asarray(t, dtype=float)
    _check_t(tt)
    value = expit(a1 + g1 * _inner(tt, a0, g0))
    return float(value) if value.ndim == 0 else value


def sroc_composed(
    t: float | np.ndarray, beta: Sequence[float] | np.ndarray
) -> float | np.ndarray:
    """
    The same curve built from the two threshold lines: find the threshold x whose
    specificity expit(alpha0 + gamma0 x) equals 1 - t, then read the sensitivity
    expit(alpha1 + gamma1 x) there.
    """
    a1, a0, g1, g0 = _unpack(beta)
    tt = np.asarray(t, dtype=float)
    _check_t(tt)
    specificity = 1.0 - tt
    x = (logit(specificity) - a0) / g0
    value = expit(a1 + g1 * x)
    return float(value) if value.ndim == 0 else value


def sroc_gradient(t: float | np.ndarray, beta: Sequence[float] | np.ndarray) -> np.ndarray:
    """
    Partial derivatives of the curve with respect to beta.

    :return: Array of shape t.shape + (4,).
    """
    a1, a0, g1, g0 = _unpack(beta)
    tt = np.asarray(t, dtype=float)
    _check_t(tt)
    u = _inner(tt, a0, g0)
    s = expit(a1 + g1 * u)
    ds = s * (1.0 - s)
    return np.stack(
        [
            ds,
            -(g1 / g0) * ds,
            u * ds,
            -(g1 / g0) * u * ds,
        ],
        axis=-1,
    )


def quadratic_form(g: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """g^T C g over the last axis of g, clipped at 0 against rounding."""
    cov = np.asarray(cov, dtype=float)
    return np.maximum(np.einsum("...i,ij,...j->...", g, cov, g), 0.0)


def sroc_variance(
    t: float | np.ndarray,
    beta: Sequence[float] | np.ndarray,
    cov_beta: np.ndarray,
) -> float | np.ndarray:
    var = quadratic_form(sroc_gradient(t, beta), cov_beta)
    return float(var) if np.ndim(var) == 0 else var


def ausc(beta: Sequence[float] | np.ndarray, epsabs: float = QUAD_EPSABS) -> float:
    """
    Area under the summary ROC curve by adaptive Gauss-Kronrod quadrature.

    The quadrature nodes never touch t = 0 or t = 1.

    :raises QuadratureError: The requested accuracy was not reached.
    """
    _unpack(beta)
    out = integrate.quad(
        lambda t: sroc_value(t, beta),
        0.0,
        1.0,
        epsabs=epsabs,
        epsrel=0.0,
        limit=QUAD_LIMIT,
        full_output=1,
    )
    value, abserr = float(out[0]), float(out[1])
    if len(out) > 3 and abserr > epsabs:
        raise QuadratureError(f"AUSC quadrature did not converge: {out[3]}", abserr)
    return value


def ausc_gradient(beta: Sequence[float] | np.ndarray, epsabs: float = QUAD_EPSABS) -> np.ndarray:
    """Gradient of the area, integrating the curve gradient componentwise."""
    _unpack(beta)
    value, abserr, info = integrate.quad_vec(
        lambda t: sroc_gradient(t, beta),
        0.0,
        1.0,
        epsabs=epsabs,
        epsrel=0.0,
        limit=QUAD_LIMIT,
        full_output=True,
    )
    if not info.success and abserr > epsabs:
        raise QuadratureError(
            f"AUSC gradient quadrature did not converge (status {info.status})", abserr
        )
    return np.asarray(value, dtype=float)


def ausc_variance(beta: Sequence[float] | np.ndarray, cov_beta: np.ndarray) -> float:
    return float(quadratic_form(ausc_gradient(beta), cov_beta))


@dataclass(frozen=True)
class AuscEstimate:
    value: float
    se: float
    lower: float
    upper: float
    level: float

    def to_json_dict(self) -> dict[str, float | None]:
        return {
            "ausc": json_float(self.value),
            "se": json_float(self.se),
            "lower": json_float(self.lower),
            "upper": json_float(self.upper),
            "level": self.level,
        }


def ausc_estimate(
    beta: Sequence[float] | np.ndarray, cov_beta: np.ndarray, level: float = 0.95
) -> AuscEstimate:
    """AUSC with its delta-method SE and a Wald interval built on the logit scale."""
    value = ausc(beta)
    se = float(np.sqrt(ausc_variance(beta, cov_beta)))
    lower, upper = wald_ci(value, se, level, Transform.LOGIT)
    return AuscEstimate(value=value, se=se, lower=lower, upper=upper, level=level)


@dataclass(frozen=True)
class SrocPoint:
    t: float
    value: float
    variance: float
    lower: float
    upper: float


def curve_grid(size: int) -> np.ndarray:
    """`size` cell midpoints of (0, 1), strictly increasing."""
    if size < 1:
        raise ValueError(f"Grid size must be >= 1, got {size}")
    return (np.arange(size) + 0.5) / size


def sroc_points(
    beta: Sequence[float] | np.ndarray,
    cov_beta: np.ndarray,
    grid: np.ndarray,
    level: float = 0.95,
) -> list[SrocPoint]:
    """Curve values with pointwise bands on the probability scale, clamped to [0, 1]."""
    values = np.asarray(sroc_value(grid, beta))
    variances = np.asarray(sroc_variance(grid, beta, cov_beta))
    half = normal_quantile(level) * np.sqrt(variances)
    lower = np.clip(values - half, 0.0, 1.0)
    upper = np.clip(values + half, 0.0, 1.0)
    return [
        SrocPoint(float(t), float(v), float(var), float(lo), float(hi))
        for t, v, var, lo, hi in zip(grid, values, variances, lower, upper, strict=True)
    ]
