# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

from .config import FitConfig
from .estimate import (
    FitError,
    FitPreconditionError,
    classify_failure,
    fit,
    hessian_cov,
    sandwich_cov,
)
from .optimize import OptimizeStatus, optimize
from .result import FitResult, Transform, wald_ci
from .tool import FitTool

__all__ = [
    "FitConfig",
    "FitError",
    "FitPreconditionError",
    "FitResult",
    "FitTool",
    "OptimizeStatus",
    "Transform",
    "classify_failure",
    "fit",
    "hessian_cov",
    "optimize",
    "sandwich_cov",
    "wald_ci",
]
