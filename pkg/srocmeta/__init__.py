# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

from .data import ValidateTool
from .fit import FitTool
from .simulate import SimulateTool
from .sroc import SrocTool

__all__ = [
    "FitTool",
    "SimulateTool",
    "SrocTool",
    "ValidateTool",
]
