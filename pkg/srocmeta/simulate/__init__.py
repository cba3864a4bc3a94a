# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

from .config import ConfigError, Estimator, Missingness, SimConfig, load_config
from .generate import apply_mcar, generate_dataset, replicate_rng
from .harness import McSummary, ReplicateFit, coverage_row, run_mc, run_replicate
from .tool import SimulateTool

__all__ = [
    "ConfigError",
    "Estimator",
    "McSummary",
    "Missingness",
    "ReplicateFit",
    "SimConfig",
    "SimulateTool",
    "apply_mcar",
    "coverage_row",
    "generate_dataset",
    "load_config",
    "replicate_rng",
    "run_mc",
    "run_replicate",
]
