# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

from .likelihood import (
    LOWER_BOUNDS,
    PARAM_NAMES,
    UPPER_BOUNDS,
    Criterion,
    LikelihoodModel,
    Method,
    NotPositiveDefiniteError,
    SingularInformationError,
    Theta,
    loglik,
    marginal_cov,
    per_study_score,
    reml_loglik,
)
from .numdiff import DifferentiationError
from .within import (
    CovStructure,
    WithinCov,
    WithinCovError,
    diagonal_cov,
    multinomial_cov,
)

__all__ = [
    "LOWER_BOUNDS",
    "PARAM_NAMES",
    "UPPER_BOUNDS",
    "CovStructure",
    "Criterion",
    "DifferentiationError",
    "LikelihoodModel",
    "Method",
    "NotPositiveDefiniteError",
    "SingularInformationError",
    "Theta",
    "WithinCov",
    "WithinCovError",
    "diagonal_cov",
    "loglik",
    "marginal_cov",
    "multinomial_cov",
    "per_study_score",
    "reml_loglik",
]
