# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass

from srocmeta.model.likelihood import Criterion, Method

DEFAULT_METHOD: Method = Method.PSEUDO
DEFAULT_CRITERION: Criterion = Criterion.REML
DEFAULT_MAX_ITER: int = 500
DEFAULT_OBJECTIVE_TOL: float = 1e-8
DEFAULT_PARAM_TOL: float = 1e-6
DEFAULT_MULTISTART: int = 5
DEFAULT_BOUNDARY_EPS: float = 1e-4
DEFAULT_LEVEL: float = 0.95


@dataclass(frozen=True)
class FitConfig:
    method: Method = DEFAULT_METHOD
    criterion: Criterion = DEFAULT_CRITERION
    max_iter: int = DEFAULT_MAX_ITER
    objective_tol: float = DEFAULT_OBJECTIVE_TOL
    param_tol: float = DEFAULT_PARAM_TOL
    multistart: int = DEFAULT_MULTISTART
    boundary_eps: float = DEFAULT_BOUNDARY_EPS
    level: float = DEFAULT_LEVEL

    def __post_init__(self) -> None:
        # Coerce plain strings coming from JSON configs.
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "criterion", Criterion(self.criterion))
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.objective_tol > 0 or not self.param_tol > 0:
            raise ValueError("Convergence tolerances must be positive")
        if self.multistart < 1:
            raise ValueError(f"multistart must be >= 1, got {self.multistart}")
        if not 0 < self.boundary_eps < 1:
            raise ValueError(f"boundary_eps must lie in (0, 1), got {self.boundary_eps}")
        if not 0 < self.level < 1:
            raise ValueError(f"level must lie in (0, 1), got {self.level}")
