# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import json
import math
import os
from dataclasses import dataclass, field, replace
from enum import StrEnum
from typing import Any

import numpy as np
from avrokit import parse_url

from srocmeta.base import SEED_ENV
from srocmeta.data.records import (
    DEFAULT_CORRECTION_CONSTANT,
    ContinuityCorrection,
    CorrectionMode,
)
from srocmeta.fit.config import DEFAULT_LEVEL, FitConfig
from srocmeta.model.likelihood import Criterion, Method, Theta

DEFAULT_THETA = Theta(
    alpha1=2.0,
    alpha0=1.0,
    gamma1=-2.0,
    gamma0=1.5,
    tau1_sq=0.1,
    tau0_sq=0.1,
    rho=0.6,
)
DEFAULT_N_STUDIES: int = 50
DEFAULT_M_MAX: int = 5
DEFAULT_REPLICATES: int = 1000
DEFAULT_N_RANGE: tuple[int, int] = (10, 500)
DEFAULT_GRID_RANGE: tuple[float, float] = (-1.0, 2.0)
DEFAULT_SEED: int = 0
DEFAULT_MULTISTART: int = 1


class ConfigError(ValueError):
    pass


class Missingness(StrEnum):
    FULL = "full"
    MCAR = "mcar"


class Estimator(StrEnum):
    PSEUDO_ML = "pseudo-ml"
    PSEUDO_REML = "pseudo-reml"
    RILEY_ML = "riley-ml"
    RILEY_REML = "riley-reml"

    @property
    def method(self) -> Method:
        return Method(self.value.split("-")[0])

    @property
    def criterion(self) -> Criterion:
        return Criterion(self.value.split("-")[1])


def default_thresholds(m_max: int) -> tuple[float, ...]:
    lo, hi = DEFAULT_GRID_RANGE
    if m_max == 1:
        return ((lo + hi) / 2,)
    return tuple(float(x) for x in np.linspace(lo, hi, m_max))


@dataclass(frozen=True)
class SimConfig:
    theta: Theta = DEFAULT_THETA
    n_studies: int = DEFAULT_N_STUDIES
    m_max: int = DEFAULT_M_MAX
    missingness: Missingness = Missingness.FULL
    replicates: int = DEFAULT_REPLICATES
    n_range: tuple[int, int] = DEFAULT_N_RANGE
    thresholds: tuple[float, ...] = ()
    seed: int = DEFAULT_SEED
    estimators: tuple[Estimator, ...] = tuple(Estimator)
    multistart: int = DEFAULT_MULTISTART
    correction: ContinuityCorrection = field(default_factory=ContinuityCorrection)
    level: float = DEFAULT_LEVEL

    def __post_init__(self) -> None:
        if not self.thresholds and self.m_max >= 1:
            object.__setattr__(self, "thresholds", default_thresholds(self.m_max))
        self._validate()

    def _validate(self) -> None:
        t = self.theta
        checks = [
            (self.replicates >= 1, "replicates", f"must be >= 1, got {self.replicates}"),
            (self.m_max >= 1, "m_max", f"must be >= 1, got {self.m_max}"),
            (self.n_studies >= 2, "n_studies", f"must be >= 2, got {self.n_studies}"),
            (t.tau1_sq >= 0, "tau1_sq", f"must be >= 0, got {t.tau1_sq}"),
            (t.tau0_sq >= 0, "tau0_sq", f"must be >= 0, got {t.tau0_sq}"),
            (abs(t.rho) <= 1, "rho", f"|rho| must be <= 1, got {t.rho}"),
            (t.gamma1 <= 0, "gamma1", f"must be <= 0, got {t.gamma1}"),
            (t.gamma0 > 0, "gamma0", f"must be > 0, got {t.gamma0}"),
            (
                1 <= self.n_range[0] <= self.n_range[1],
                "n_min/n_max",
                f"need 1 <= n_min <= n_max, got {self.n_range}",
            ),
            (
                len(self.thresholds) == self.m_max,
                "thresholds",
                f"grid length {len(self.thresholds)} != m_max {self.m_max}",
            ),
            (
                all(math.isfinite(x) for x in self.thresholds)
                and all(b > a for a, b in zip(self.thresholds, self.thresholds[1:])),
                "thresholds",
                "must be finite and strictly increasing",
            ),
            (len(self.estimators) >= 1, "estimators", "at least one estimator is required"),
            (self.multistart >= 1, "multistart", f"must be >= 1, got {self.multistart}"),
            (0 < self.level < 1, "level", f"must lie in (0, 1), got {self.level}"),
        ]
        for ok, key, message in checks:
            if not ok:
                raise ConfigError(f"{key}: {message}")

    def fit_config(self, estimator: Estimator) -> FitConfig:
        return FitConfig(
            method=estimator.method,
            criterion=estimator.criterion,
            multistart=self.multistart,
            level=self.level,
        )

    def with_overrides(
        self, seed: int | None = None, replicates: int | None = None
    ) -> "SimConfig":
        changes: dict[str, Any] = {}
        if seed is not None:
            changes["seed"] = seed
        if replicates is not None:
            changes["replicates"] = replicates
        return replace(self, **changes) if changes else self

    def to_json_dict(self) -> dict[str, Any]:
        return {
            **self.theta.to_dict(),
            "n_studies": self.n_studies,
            "m_max": self.m_max,
            "missingness": str(self.missingness),
            "mcar_subset_size": f"uniform on 1..{self.m_max}",
            "replicates": self.replicates,
            "n_min": self.n_range[0],
            "n_max": self.n_range[1],
            "thresholds": list(self.thresholds),
            "seed": self.seed,
            "estimators": [str(e) for e in self.estimators],
            "multistart": self.multistart,
            "correction": str(self.correction.mode),
            "correction_constant": self.correction.constant,
            "level": self.level,
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "SimConfig":
        """
        Build a config from a JSON object; absent keys take their defaults.

        :raises ConfigError: Unknown keys, malformed values or a broken invariant.
        """
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(data) - set(JSON_KEYS))
        if unknown:
            raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
        try:
            theta = Theta(
                **{
                    name: float(data.get(name, getattr(DEFAULT_THETA, name)))
                    for name in DEFAULT_THETA.to_dict()
                }
            )
            m_max = int(data.get("m_max", DEFAULT_M_MAX))
            correction = ContinuityCorrection(
                CorrectionMode(data.get("correction", CorrectionMode.PER_THRESHOLD)),
                float(data.get("correction_constant", DEFAULT_CORRECTION_CONSTANT)),
            )
            return cls(
                theta=theta,
                n_studies=int(data.get("n_studies", DEFAULT_N_STUDIES)),
                m_max=m_max,
                missingness=Missingness(data.get("missingness", Missingness.FULL)),
                replicates=int(data.get("replicates", DEFAULT_REPLICATES)),
                n_range=(
                    int(data.get("n_min", DEFAULT_N_RANGE[0])),
                    int(data.get("n_max", DEFAULT_N_RANGE[1])),
                ),
                thresholds=tuple(float(x) for x in data.get("thresholds", ())),
                seed=int(data.get("seed", DEFAULT_SEED)),
                estimators=tuple(
                    Estimator(e) for e in data.get("estimators", list(Estimator))
                ),
                multistart=int(data.get("multistart", DEFAULT_MULTISTART)),
                correction=correction,
                level=float(data.get("level", DEFAULT_LEVEL)),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(f"malformed config: {e}") from e


OUTPUT_ONLY_KEYS: frozenset[str] = frozenset({"mcar_subset_size"})
JSON_KEYS: tuple[str, ...] = tuple(
    k for k in SimConfig().to_json_dict() if k not in OUTPUT_ONLY_KEYS
)


def load_config(path: str | os.PathLike[str]) -> SimConfig:
    with parse_url(str(path)).with_mode("r") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"cannot parse JSON: {e}") from e
    return SimConfig.from_json_dict(data)


def seed_from_env() -> int | None:
    value = os.environ.get(SEED_ENV)
    if value is None or not value.strip():
        return None
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}={value!r} is not an integer")
