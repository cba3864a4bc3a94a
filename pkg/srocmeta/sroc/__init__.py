# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

from .curve import (
    QuadratureError,
    SrocPoint,
    UndefinedCurveError,
    ausc,
    ausc_gradient,
    ausc_variance,
    sroc_gradient,
    sroc_value,
    sroc_variance,
)
from .regions import Ellipse, SummaryPoint, summary_point, youden_optimal
from .tool import SrocTool

__all__ = [
    "Ellipse",
    "QuadratureError",
    "SrocPoint",
    "SrocTool",
    "SummaryPoint",
    "UndefinedCurveError",
    "ausc",
    "ausc_gradient",
    "ausc_variance",
    "sroc_gradient",
    "sroc_value",
    "sroc_variance",
    "summary_point",
    "youden_optimal",
]
