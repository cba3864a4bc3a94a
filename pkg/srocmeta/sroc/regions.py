# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats
from scipy.special import expit

from srocmeta.fit.result import FitResult

YOUDEN_TIE_TOL: float = 1e-12
DEFAULT_BOUNDARY_POINTS: int = 100


@dataclass(frozen=True)
class Ellipse:
    """
    Region {z : (z - center)^T cov^-1 (z - center) <= q} on the logit scale,
    where z = (logit Se, logit Sp) and q is the chi-square(2) quantile at `level`.
    """

    center: np.ndarray
    cov: np.ndarray
    level: float

    @property
    def radius_sq(self) -> float:
        return float(stats.chi2.ppf(self.level, df=2))

    def boundary(self, n: int = DEFAULT_BOUNDARY_POINTS) -> np.ndarray:
        """
        Closed outline mapped to ROC space.

        :return: n x 2 array of (1 - Sp, Se) points.
        """
        w, v = np.linalg.eigh(self.cov)
        root = v @ np.diag(np.sqrt(np.clip(w, 0.0, None)))
        angles = np.linspace(0.0, 2.0 * np.pi, n)
        circle = np.stack([np.cos(angles), np.sin(angles)])
        z = self.center[:, None] + np.sqrt(self.radius_sq) * (root @ circle)
        return np.column_stack([1.0 - expit(z[1]), expit(z[0])])

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Membership of logit-scale points given as an N x 2 array."""
        d = np.atleast_2d(np.asarray(points, dtype=float)) - self.center
        dist = np.einsum("ni,ni->n", d, np.linalg.solve(self.cov, d.T).T)
        return dist <= self.radius_sq


@dataclass(frozen=True)
class SummaryPoint:
    threshold: float
    sse: float
    ssp: float
    cov: np.ndarray  # logit scale, of (alpha1 + gamma1 x, alpha0 + gamma0 x)
    confidence: Ellipse
    prediction: Ellipse

    def to_json_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "sse": self.sse,
            "ssp": self.ssp,
            "cov": self.cov.tolist(),
        }


def summary_point(x: float, fit: FitResult, level: float | None = None) -> SummaryPoint:
    """
    Summary sensitivity and specificity at threshold `x` with its regions.

    The prediction region adds the between-study covariance to the
    covariance of the estimated logits before taking the quantile.
    """
    level = fit.level if level is None else level
    a = np.array([[1.0, 0.0, x, 0.0], [0.0, 1.0, 0.0, x]])
    center = a @ fit.theta.beta
    cov = a @ fit.beta_cov @ a.T
    cov = (cov + cov.T) / 2
    return SummaryPoint(
        threshold=float(x),
        sse=float(expit(center[0])),
        ssp=float(expit(center[1])),
        cov=cov,
        confidence=Ellipse(center, cov, level),
        prediction=Ellipse(center, cov + fit.theta.between_cov(), level),
    )


def youden_index(x: float | np.ndarray, beta: Sequence[float] | np.ndarray) -> np.ndarray:
    a1, a0, g1, g0 = np.asarray(beta, dtype=float)[:4]
    xx = np.asarray(x, dtype=float)
    return expit(a1 + g1 * xx) + expit(a0 + g0 * xx) - 1.0


@dataclass(frozen=True)
class YoudenPoint:
    threshold: float
    sse: float
    ssp: float

    @property
    def index(self) -> float:
        return self.sse + self.ssp - 1.0

    def to_text(self) -> str:
        return (
            f"Youden optimum: x* = {self.threshold:g}  "
            f"SSe = {self.sse * 100:.1f}%  SSp = {self.ssp * 100:.1f}%"
        )


def best_threshold(
    beta: Sequence[float] | np.ndarray,
    candidates: Sequence[float],
    refine: bool = False,
) -> YoudenPoint:
    """
    Candidate maximizing Se + Sp - 1; near-ties go to the smaller threshold.

    With `refine` the maximum is searched continuously between the smallest
    and largest candidate and kept when it improves on the best candidate.
    """
    if len(candidates) == 0:
        raise ValueError("At least one candidate threshold is required")
    xs = np.sort(np.asarray(candidates, dtype=float))
    index = youden_index(xs, beta)
    best = float(xs[np.flatnonzero(index >= index.max() - YOUDEN_TIE_TOL)[0]])
    if refine and xs[-1] > xs[0]:
        res = optimize.minimize_scalar(
            lambda x: -float(youden_index(x, beta)),
            bounds=(float(xs[0]), float(xs[-1])),
            method="bounded",
        )
        if -res.fun > float(youden_index(best, beta)) + YOUDEN_TIE_TOL:
            best = float(res.x)
    a1, a0, g1, g0 = np.asarray(beta, dtype=float)[:4]
    return YoudenPoint(
        threshold=best,
        sse=float(expit(a1 + g1 * best)),
        ssp=float(expit(a0 + g0 * best)),
    )


def youden_optimal(
    fit: FitResult, candidates: Sequence[float] | None = None, refine: bool = False
) -> YoudenPoint:
    """Youden-optimal threshold of a fit, searching its threshold registry by default."""
    return best_threshold(
        fit.theta.beta,
        list(fit.registry) if candidates is None else candidates,
        refine,
    )
