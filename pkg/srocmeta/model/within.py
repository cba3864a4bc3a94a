# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from srocmeta.data.records import DEFAULT_CORRECTION_CONSTANT, LogitStudy


class WithinCovError(ValueError):
    pass


class CovStructure(StrEnum):
    DIAGONAL = "diagonal"
    FULL = "full"


@dataclass(frozen=True)
class WithinCov:
    """Within-study covariance of a study's logit sensitivities and specificities."""

    omega1: np.ndarray
    omega0: np.ndarray
    structure: CovStructure

    @property
    def m(self) -> int:
        return self.omega1.shape[0]

    def block(self) -> np.ndarray:
        """The 2m x 2m block-diagonal matrix; Se and Sp come from different patients."""
        m1, m0 = self.omega1.shape[0], self.omega0.shape[0]
        out = np.zeros((m1 + m0, m1 + m0))
        out[:m1, :m1] = self.omega1
        out[m1:, m1:] = self.omega0
        return out


def _check_proportions(p: np.ndarray, decreasing: bool, label: str) -> None:
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise WithinCovError(
            f"{label} proportions must lie strictly inside (0, 1); apply the continuity correction first"
        )
    steps = np.diff(p)
    if (decreasing and np.any(steps > 0)) or (not decreasing and np.any(steps < 0)):
        raise WithinCovError(f"{label} proportions are not monotone in the threshold")


def nested_logit_cov(p: np.ndarray, n: float, decreasing: bool) -> np.ndarray:
    """
    Delta-method covariance of logits of nested cumulative proportions.

    For events A ⊇ B with proportions p_A >= p_B estimated from the same n
    subjects, Cov(logit p̂_A, logit p̂_B) = 1 / (n p_A (1 - p_B)).

    :param p: Cumulative proportions ordered by threshold.
    :param n: Number of subjects the proportions are computed from.
    :param decreasing: True when p decreases with the threshold (sensitivities).
    :return: m x m covariance matrix.
    """
    idx = np.arange(len(p))
    lo = np.minimum.outer(idx, idx)
    hi = np.maximum.outer(idx, idx)
    if decreasing:
        larger, smaller = p[lo], p[hi]
    else:
        larger, smaller = p[hi], p[lo]
    return 1.0 / (n * larger * (1.0 - smaller))


def fill_empty_cells(
    p: np.ndarray, n: float, decreasing: bool, constant: float
) -> tuple[np.ndarray, float]:
    """
    Add ``constant`` to every empty cell between two consecutive thresholds.

    Tied cumulative proportions leave a multinomial cell with no subjects,
    which makes the nested covariance singular. The filled cells are summed
    back into cumulative proportions over the enlarged total.

    :return: The filled proportions and total, unchanged when nothing is tied.
    """
    d = p if decreasing else p[::-1]
    cells = n * (d[:-1] - d[1:])
    empty = cells <= 0.0
    if not np.any(empty):
        return p, n
    cells = np.where(empty, cells + constant, cells)
    n_filled = n + constant * np.count_nonzero(empty)
    tail = np.append(np.cumsum(cells[::-1])[::-1], 0.0)
    d_filled = (n * d[-1] + tail) / n_filled
    return (d_filled if decreasing else d_filled[::-1]), float(n_filled)


def multinomial_cov(
    study: LogitStudy, constant: float = DEFAULT_CORRECTION_CONSTANT
) -> WithinCov:
    """
    Full within-study covariance from the multinomial model of test values
    falling between consecutive thresholds.

    Empty cells between tied thresholds receive ``constant`` first, so the
    result is positive definite.

    :param study: A logit-scale study whose proportions are already corrected.
    :param constant: Count added to each empty interior cell.
    :return: WithinCov with structure FULL.
    """
    se = np.asarray(study.se, dtype=float)
    sp = np.asarray(study.sp, dtype=float)
    _check_proportions(se, decreasing=True, label="Sensitivity")
    _check_proportions(sp, decreasing=False, label="Specificity")
    se, n1 = fill_empty_cells(se, study.n_diseased, True, constant)
    sp, n0 = fill_empty_cells(sp, study.n_nondiseased, False, constant)
    return WithinCov(
        omega1=nested_logit_cov(se, n1, decreasing=True),
        omega0=nested_logit_cov(sp, n0, decreasing=False),
        structure=CovStructure.FULL,
    )


def diagonal_cov(study: LogitStudy) -> WithinCov:
    """Working-independence covariance built from the per-threshold variances."""
    return WithinCov(
        omega1=np.diag(np.asarray(study.var1, dtype=float)),
        omega0=np.diag(np.asarray(study.var0, dtype=float)),
        structure=CovStructure.DIAGONAL,
    )


def diagonalize(w: WithinCov) -> WithinCov:
    return WithinCov(
        omega1=np.diag(np.diag(w.omega1)),
        omega0=np.diag(np.diag(w.omega0)),
        structure=CovStructure.DIAGONAL,
    )
