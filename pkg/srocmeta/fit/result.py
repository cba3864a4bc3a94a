# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import math
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

import numpy as np
from scipy import stats
from scipy.special import expit, logit

from srocmeta.model.likelihood import (
    BETA_NAMES,
    N_PARAMS,
    PARAM_NAMES,
    Criterion,
    Method,
    Theta,
)

from .optimize import OptimizeStatus


class Transform(StrEnum):
    IDENTITY = "identity"
    LOGIT = "logit"


def normal_quantile(level: float) -> float:
    """Two-sided standard normal critical value for a confidence level."""
    return float(stats.norm.ppf((1.0 + level) / 2.0))


def wald_ci(
    estimate: float,
    se: float,
    level: float = 0.95,
    transform: Transform = Transform.IDENTITY,
) -> tuple[float, float]:
    """
    Wald confidence interval, optionally built on the logit scale.

    On the logit scale the half-width is z * se / (est (1 - est)), and the
    endpoints are mapped back with the inverse logit.

    :param estimate: Point estimate; must lie in (0, 1) for the logit transform.
    :param se: Standard error on the natural scale.
    :param level: Confidence level.
    :param transform: Scale on which the symmetric interval is built.
    :return: (lower, upper) with lower <= upper.
    """
    if se < 0:
        raise ValueError(f"Standard error must be >= 0, got {se}")
    if se == 0:
        return (estimate, estimate)
    z = normal_quantile(level)
    if transform == Transform.LOGIT:
        if not 0.0 < estimate < 1.0:
            raise ValueError(f"Logit interval needs an estimate in (0, 1), got {estimate}")
        centre = float(logit(estimate))
        half = z * se / (estimate * (1.0 - estimate))
        lo, hi = float(expit(centre - half)), float(expit(centre + half))
    else:
        lo, hi = estimate - z * se, estimate + z * se
    return (min(lo, hi), max(lo, hi))


def two_sided_p(z: float) -> float:
    return float(2.0 * stats.norm.sf(abs(z)))


def format_p(p: float) -> str:
    if not math.isfinite(p):
        return "--"
    if p < 1e-3:
        return "< 0.001"
    return f"{p:.3f}"


def json_float(x: float) -> float | None:
    return float(x) if math.isfinite(x) else None


def from_json_float(x: float | None) -> float:
    return math.nan if x is None else float(x)


@dataclass
class FitResult:
    theta: Theta
    cov: np.ndarray
    objective: float
    converged: bool
    boundary_flags: dict[str, bool]
    method: Method
    criterion: Criterion
    iterations: int = 0
    status: OptimizeStatus = OptimizeStatus.CONVERGED
    level: float = 0.95
    n_studies: int = 0
    registry: tuple[float, ...] = ()
    j_singular: bool = False
    ci: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.cov = np.asarray(self.cov, dtype=float)
        if self.cov.shape != (N_PARAMS, N_PARAMS):
            raise ValueError(f"Covariance must be {N_PARAMS}x{N_PARAMS}, got {self.cov.shape}")
        if not self.ci:
            self.ci = {
                name: self._identity_ci(est, se)
                for name, est, se in zip(
                    PARAM_NAMES, self.theta.to_array(), self.se, strict=True
                )
            }

    def _identity_ci(self, est: float, se: float) -> tuple[float, float]:
        if not math.isfinite(se):
            return (math.nan, math.nan)
        return wald_ci(float(est), float(se), self.level)

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))

    @property
    def beta_cov(self) -> np.ndarray:
        return self.cov[:4, :4]

    @property
    def has_covariance(self) -> bool:
        return bool(np.all(np.isfinite(self.beta_cov)))

    def z_values(self) -> dict[str, float]:
        acc = {}
        for name, est, se in zip(BETA_NAMES, self.theta.beta, self.se[:4], strict=True):
            acc[name] = float(est / se) if se > 0 and math.isfinite(se) else math.nan
        return acc

    def p_values(self) -> dict[str, float]:
        return {
            name: two_sided_p(z) if math.isfinite(z) else math.nan
            for name, z in self.z_values().items()
        }

    def to_text(self) -> str:
        pct = f"{self.level * 100:g}% CI"
        lines = [
            f"Fit ({self.method}, {self.criterion})",
            "=" * len(f"Fit ({self.method}, {self.criterion})"),
            f"Studies:     {self.n_studies:>6}",
            f"Thresholds:  {len(self.registry):>6}  (distinct)",
            f"Converged:   {'yes' if self.converged else 'no'}  ({self.status}, {self.iterations} iterations)",
            f"Objective:   {self.objective:.6f}",
            "",
            f"{'Parameter':<10} {'Estimate':>10} {'SE':>9}   {pct:<20} {'p-value':>8}",
        ]
        p_values = self.p_values()
        for name, est, se in zip(PARAM_NAMES, self.theta.to_array(), self.se, strict=True):
            lo, hi = self.ci[name]
            interval = f"({lo:.3f}, {hi:.3f})" if math.isfinite(lo) else "--"
            p = format_p(p_values[name]) if name in p_values else "--"
            se_text = f"{se:9.3f}" if math.isfinite(se) else f"{'--':>9}"
            lines.append(f"{name:<10} {est:>10.3f} {se_text}   {interval:<20} {p:>8}")
        flagged = [name for name, flag in self.boundary_flags.items() if flag]
        if flagged:
            lines.append("")
            lines.append(f"Boundary:    {', '.join(flagged)}")
        if self.j_singular:
            lines.append("Warning:     Hessian is numerically singular; no standard errors")
        return "\n".join(lines)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "theta": self.theta.to_dict(),
            "se": {name: json_float(se) for name, se in zip(PARAM_NAMES, self.se, strict=True)},
            "cov": [[json_float(v) for v in row] for row in self.cov],
            "converged": self.converged,
            "boundary_flags": dict(self.boundary_flags),
            "objective": json_float(self.objective),
            "method": str(self.method),
            "criterion": str(self.criterion),
            "ci": {name: [json_float(lo), json_float(hi)] for name, (lo, hi) in self.ci.items()},
            "iterations": self.iterations,
            "status": str(self.status),
            "n_studies": self.n_studies,
            "level": self.level,
            "registry": list(self.registry),
            "j_singular": self.j_singular,
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "FitResult":
        try:
            theta = Theta(**{name: float(data["theta"][name]) for name in PARAM_NAMES})
            cov = np.array(
                [[from_json_float(v) for v in row] for row in data["cov"]], dtype=float
            )
            ci = {
                name: (from_json_float(lo), from_json_float(hi))
                for name, (lo, hi) in data.get("ci", {}).items()
            }
            return cls(
                theta=theta,
                cov=cov,
                objective=from_json_float(data["objective"]),
                converged=bool(data["converged"]),
                boundary_flags={k: bool(v) for k, v in data["boundary_flags"].items()},
                method=Method(data["method"]),
                criterion=Criterion(data["criterion"]),
                iterations=int(data.get("iterations", 0)),
                status=OptimizeStatus(data.get("status", OptimizeStatus.CONVERGED)),
                level=float(data.get("level", 0.95)),
                n_studies=int(data.get("n_studies", 0)),
                registry=tuple(float(x) for x in data.get("registry", [])),
                j_singular=bool(data.get("j_singular", False)),
                ci=ci,
            )
        except (KeyError, TypeError) as e:
            raise ValueError(f"Malformed fit result: {e}") from e
