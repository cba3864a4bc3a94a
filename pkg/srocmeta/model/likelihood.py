# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import logging
import math
from collections.abc import Sequence
from dataclasses import astuple, dataclass
from enum import StrEnum

import numpy as np

from srocmeta.data.records import Dataset, LogitStudy

from . import numdiff
from .within import CovStructure, WithinCov, diagonal_cov, diagonalize, multinomial_cov

logger = logging.getLogger(__name__)

PARAM_NAMES: tuple[str, ...] = (
    "alpha1",
    "alpha0",
    "gamma1",
    "gamma0",
    "tau1_sq",
    "tau0_sq",
    "rho",
)
BETA_NAMES: tuple[str, ...] = PARAM_NAMES[:4]
N_PARAMS = len(PARAM_NAMES)

RHO_BOUND: float = 1.0 - 1e-8
LOWER_BOUNDS = np.array([-np.inf, -np.inf, -np.inf, 0.0, 0.0, 0.0, -RHO_BOUND])
UPPER_BOUNDS = np.array([np.inf, np.inf, 0.0, np.inf, np.inf, np.inf, RHO_BOUND])

PIVOT_TOLERANCE: float = 1e-12
MAX_INFORMATION_CONDITION: float = 1e13


class NotPositiveDefiniteError(ArithmeticError):
    pass


class SingularInformationError(ArithmeticError):
    pass


class Method(StrEnum):
    PSEUDO = "pseudo"
    RILEY = "riley"


class Criterion(StrEnum):
    ML = "ml"
    REML = "reml"


@dataclass(frozen=True)
class Theta:
    alpha1: float
    alpha0: float
    gamma1: float
    gamma0: float
    tau1_sq: float
    tau0_sq: float
    rho: float

    @property
    def beta(self) -> np.ndarray:
        return np.array([self.alpha1, self.alpha0, self.gamma1, self.gamma0])

    def between_cov(self) -> np.ndarray:
        return between_cov(self.tau1_sq, self.tau0_sq, self.rho)

    def to_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float] | np.ndarray) -> "Theta":
        return cls(*(float(v) for v in values))

    def to_dict(self) -> dict[str, float]:
        return dict(zip(PARAM_NAMES, astuple(self), strict=True))

    def violations(self) -> list[str]:
        acc = []
        if self.gamma1 > 0:
            acc.append(f"gamma1={self.gamma1} must be <= 0")
        if self.gamma0 < 0:
            acc.append(f"gamma0={self.gamma0} must be >= 0")
        if self.tau1_sq < 0 or self.tau0_sq < 0:
            acc.append("between-study variances must be >= 0")
        if not -1.0 <= self.rho <= 1.0:
            acc.append(f"rho={self.rho} must lie in [-1, 1]")
        return acc


def between_cov(tau1_sq: float, tau0_sq: float, rho: float) -> np.ndarray:
    cross = rho * math.sqrt(max(tau1_sq, 0.0)) * math.sqrt(max(tau0_sq, 0.0))
    return np.array([[tau1_sq, cross], [cross, tau0_sq]])


def _as_array(theta: Theta | np.ndarray | Sequence[float]) -> np.ndarray:
    if isinstance(theta, Theta):
        return theta.to_array()
    return np.asarray(theta, dtype=float)


@dataclass(frozen=True)
class StudyDesign:
    incidence: np.ndarray  # 2m x 2
    z: np.ndarray  # 2m x 4, columns (alpha1, alpha0, gamma1, gamma0)
    y: np.ndarray  # (Y1_1..Y1_m, Y0_1..Y0_m)


def incidence_matrix(m: int) -> np.ndarray:
    out = np.zeros((2 * m, 2))
    out[:m, 0] = 1.0
    out[m:, 1] = 1.0
    return out


def design_matrix(thresholds: Sequence[float] | np.ndarray) -> np.ndarray:
    x = np.asarray(thresholds, dtype=float)
    m = x.size
    z = np.zeros((2 * m, 4))
    z[:m, 0] = 1.0
    z[m:, 1] = 1.0
    z[:m, 2] = x
    z[m:, 3] = x
    return z


def study_design(study: LogitStudy) -> StudyDesign:
    return StudyDesign(
        incidence=incidence_matrix(study.m),
        z=design_matrix(study.thresholds),
        y=np.concatenate([study.y1, study.y0]),
    )


def marginal_cov(theta: Theta, w: WithinCov) -> np.ndarray:
    """
    Marginal covariance of a study's stacked outcomes: I G I^T + Omega.

    :param theta: Parameters providing the between-study matrix G.
    :param w: Within-study covariance of the study.
    :return: 2m x 2m symmetric matrix.
    """
    if w.omega1.shape != w.omega0.shape or w.omega1.shape[0] != w.omega1.shape[1]:
        raise ValueError(
            f"Dimension mismatch: omega1 {w.omega1.shape}, omega0 {w.omega0.shape}"
        )
    inc = incidence_matrix(w.m)
    return inc @ theta.between_cov() @ inc.T + w.block()


def _cholesky(sigma: np.ndarray) -> np.ndarray:
    """Batched Cholesky factor; small pivots relative to the diagonal count as failure."""
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefiniteError(str(e)) from e
    pivots = np.diagonal(chol, axis1=-2, axis2=-1) ** 2
    scale = np.max(np.diagonal(sigma, axis1=-2, axis2=-1), axis=-1, keepdims=True)
    if not np.all(pivots >= PIVOT_TOLERANCE * scale):
        raise NotPositiveDefiniteError("Marginal covariance is not positive definite")
    return chol


@dataclass
class _Block:
    index: np.ndarray  # positions of the studies in dataset order
    incidence: np.ndarray
    y: np.ndarray  # (g, 2m)
    z: np.ndarray  # (g, 2m, 4)
    omega: np.ndarray  # (g, 2m, 2m)


@dataclass(frozen=True)
class _Evaluation:
    contributions: np.ndarray
    information: np.ndarray
    score_rhs: np.ndarray


class LikelihoodModel:
    """
    Gaussian marginal likelihood of a set of logit-scale studies.

    Studies are grouped by their number of thresholds so that each group is
    evaluated with one batched factorization; per-study results are returned
    in the original study order.
    """

    def __init__(
        self,
        studies: Sequence[LogitStudy],
        method: Method,
        within: Sequence[WithinCov] | None = None,
    ) -> None:
        if not studies:
            raise ValueError("At least one study is required")
        self.method = Method(method)
        self.study_ids = tuple(s.study_id for s in studies)
        if within is None:
            if self.method == Method.RILEY:
                within = [multinomial_cov(s) for s in studies]
            else:
                within = [diagonal_cov(s) for s in studies]
        elif self.method == Method.PSEUDO:
            within = [
                w if w.structure == CovStructure.DIAGONAL else diagonalize(w)
                for w in within
            ]
        if len(within) != len(studies):
            raise ValueError("One WithinCov per study is required")
        self.within = tuple(within)
        self.n_studies = len(studies)

        groups: dict[int, list[int]] = {}
        for k, s in enumerate(studies):
            if self.within[k].m != s.m:
                raise ValueError(
                    f"Dimension mismatch for study {s.study_id!r}: {s.m} thresholds, "
                    f"{self.within[k].m}x{self.within[k].m} covariance"
                )
            groups.setdefault(s.m, []).append(k)
        self._blocks: list[_Block] = []
        for m, members in sorted(groups.items()):
            designs = [study_design(studies[k]) for k in members]
            self._blocks.append(
                _Block(
                    index=np.array(members),
                    incidence=incidence_matrix(m),
                    y=np.stack([d.y for d in designs]),
                    z=np.stack([d.z for d in designs]),
                    omega=np.stack([self.within[k].block() for k in members]),
                )
            )

    @classmethod
    def for_dataset(
        cls,
        data: Dataset,
        method: Method,
        within: Sequence[WithinCov] | None = None,
    ) -> "LikelihoodModel":
        if within is None and Method(method) == Method.RILEY:
            within = [multinomial_cov(s, data.policy.constant) for s in data.studies]
        return cls(data.studies, method, within)

    def _evaluate(self, theta: Theta | np.ndarray | Sequence[float]) -> _Evaluation:
        t = _as_array(theta)
        beta = t[:4]
        g = between_cov(t[4], t[5], t[6])
        contributions = np.empty(self.n_studies)
        information = np.zeros((4, 4))
        score_rhs = np.zeros(4)
        for block in self._blocks:
            sigma = block.omega + block.incidence @ g @ block.incidence.T
            chol = _cholesky(sigma)
            resid = block.y - block.z @ beta
            w = np.linalg.solve(chol, resid[..., None])[..., 0]
            v = np.linalg.solve(chol, block.z)
            u = np.linalg.solve(chol, block.y[..., None])[..., 0]
            logdet = 2.0 * np.sum(
                np.log(np.diagonal(chol, axis1=-2, axis2=-1)), axis=-1
            )
            contributions[block.index] = -0.5 * logdet - 0.5 * np.sum(w * w, axis=-1)
            information += np.einsum("gij,gik->jk", v, v)
            score_rhs += np.einsum("gij,gi->j", v, u)
        return _Evaluation(contributions, information, score_rhs)

    def contributions(self, theta: Theta | np.ndarray | Sequence[float]) -> np.ndarray:
        """Per-study log-likelihood terms l_k, in study order."""
        return self._evaluate(theta).contributions

    def loglik(self, theta: Theta | np.ndarray | Sequence[float]) -> float:
        return float(np.sum(self.contributions(theta)))

    def information(self, theta: Theta | np.ndarray | Sequence[float]) -> np.ndarray:
        """Fixed-effects information sum_k Z_k^T Sigma_k^-1 Z_k."""
        return self._evaluate(theta).information

    @staticmethod
    def _penalty(information: np.ndarray) -> float:
        sign, logdet = np.linalg.slogdet(information)
        if sign <= 0 or np.linalg.cond(information) > MAX_INFORMATION_CONDITION:
            raise SingularInformationError(
                "Fixed-effects information is singular; the design is collinear"
            )
        return -0.5 * float(logdet)

    def reml_penalty(self, theta: Theta | np.ndarray | Sequence[float]) -> float:
        """The restricted-likelihood term -1/2 log|sum_k Z_k^T Sigma_k^-1 Z_k|."""
        return self._penalty(self.information(theta))

    def reml_loglik(self, theta: Theta | np.ndarray | Sequence[float]) -> float:
        ev = self._evaluate(theta)
        return float(np.sum(ev.contributions)) + self._penalty(ev.information)

    def per_study_objective(
        self,
        theta: Theta | np.ndarray | Sequence[float],
        criterion: Criterion = Criterion.ML,
    ) -> np.ndarray:
        """
        Per-study terms summing to the chosen objective.

        Under REML each study carries a 1/K share of the determinant penalty.
        """
        ev = self._evaluate(theta)
        if criterion == Criterion.REML:
            return ev.contributions + self._penalty(ev.information) / self.n_studies
        return ev.contributions

    def objective(
        self,
        theta: Theta | np.ndarray | Sequence[float],
        criterion: Criterion = Criterion.ML,
    ) -> float:
        ev = self._evaluate(theta)
        value = float(np.sum(ev.contributions))
        if criterion == Criterion.REML:
            value += self._penalty(ev.information)
        return value

    def gls_beta(self, theta: Theta | np.ndarray | Sequence[float]) -> np.ndarray:
        """Generalized least-squares beta for the variance components in `theta`."""
        ev = self._evaluate(theta)
        return np.linalg.solve(ev.information, ev.score_rhs)

    def scores(
        self,
        theta: Theta | np.ndarray | Sequence[float],
        criterion: Criterion = Criterion.ML,
    ) -> np.ndarray:
        """K x 7 matrix of per-study scores by finite differences."""
        return numdiff.jacobian(
            lambda t: self.per_study_objective(t, criterion),
            _as_array(theta),
            LOWER_BOUNDS,
            UPPER_BOUNDS,
        )

    def hessian(
        self,
        theta: Theta | np.ndarray | Sequence[float],
        criterion: Criterion = Criterion.ML,
    ) -> np.ndarray:
        return numdiff.hessian(
            lambda t: self.objective(t, criterion),
            _as_array(theta),
            LOWER_BOUNDS,
            UPPER_BOUNDS,
        )


def loglik(theta: Theta, data: Dataset, mode: Method) -> float:
    return LikelihoodModel.for_dataset(data, mode).loglik(theta)


def reml_loglik(theta: Theta, data: Dataset, mode: Method) -> float:
    return LikelihoodModel.for_dataset(data, mode).reml_loglik(theta)


def per_study_score(theta: Theta, study: LogitStudy, mode: Method) -> np.ndarray:
    """Score vector of one study's log-likelihood contribution."""
    return LikelihoodModel([study], mode).scores(theta)[0]
