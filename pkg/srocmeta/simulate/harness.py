# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import json
import logging
import math
import os
from collections.abc import Iterable, Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any

import numpy as np
import pandas as pd
from avrokit import avro_schema, avro_writer, parse_url

from srocmeta.base import AVRO_CODEC, atomic_output
from srocmeta.fit.estimate import FitError, FitPreconditionError, classify_failure, fit
from srocmeta.fit.result import json_float
from srocmeta.model.likelihood import BETA_NAMES, PARAM_NAMES
from srocmeta.model.within import WithinCovError
from srocmeta.sroc.curve import QuadratureError, UndefinedCurveError, ausc, ausc_estimate

from .config import Estimator, Missingness, SimConfig
from .generate import apply_mcar, generate_dataset, replicate_rng

logger = logging.getLogger(__name__)

DEFAULT_REPORT_INTERVAL: int = 100

SUMMARY_PARAMS: tuple[str, ...] = PARAM_NAMES + ("ausc",)
COVERAGE_PARAMS: tuple[str, ...] = BETA_NAMES + ("ausc",)
SUMMARY_COLUMNS: tuple[str, ...] = (
    "estimator",
    "parameter",
    "true",
    "mcm",
    "mcsd",
    "ase",
    "coverage",
    "failure_rate",
    "attempted",
    "used",
)


def _nullable_double(name: str) -> dict[str, Any]:
    return {"name": name, "type": ["null", "double"], "default": None}


REPLICATE_SCHEMA = avro_schema(
    {
        "name": "ReplicateFit",
        "type": "record",
        "fields": [
            {"name": "replicate", "type": "int"},
            {"name": "estimator", "type": "string"},
            {"name": "failed", "type": "boolean"},
            {"name": "converged", "type": "boolean"},
            {"name": "status", "type": "string"},
            {"name": "error", "type": ["null", "string"], "default": None},
            *(_nullable_double(f"est_{p}") for p in SUMMARY_PARAMS),
            *(_nullable_double(f"se_{p}") for p in SUMMARY_PARAMS),
            *(_nullable_double(f"lower_{p}") for p in COVERAGE_PARAMS),
            *(_nullable_double(f"upper_{p}") for p in COVERAGE_PARAMS),
        ],
    }
)


@dataclass(frozen=True)
class ReplicateFit:
    """Outcome of one estimator on one simulated dataset."""

    replicate: int
    estimator: Estimator
    failed: bool
    converged: bool
    status: str
    estimates: dict[str, float]
    se: dict[str, float]
    ci: dict[str, tuple[float, float]]
    error: str | None = None

    def to_row(self) -> dict[str, Any]:
        row: dict[str, Any] = {
            "replicate": self.replicate,
            "estimator": str(self.estimator),
            "failed": self.failed,
            "converged": self.converged,
            "status": self.status,
            "error": self.error,
        }
        for p in SUMMARY_PARAMS:
            row[f"est_{p}"] = json_float(self.estimates.get(p, math.nan))
        for p in SUMMARY_PARAMS:
            row[f"se_{p}"] = json_float(self.se.get(p, math.nan))
        for p in COVERAGE_PARAMS:
            lo, hi = self.ci.get(p, (math.nan, math.nan))
            row[f"lower_{p}"] = json_float(lo)
            row[f"upper_{p}"] = json_float(hi)
        return row


def _failed_fit(index: int, estimator: Estimator, error: str) -> ReplicateFit:
    return ReplicateFit(
        replicate=index,
        estimator=estimator,
        failed=True,
        converged=False,
        status="error",
        estimates={},
        se={},
        ci={},
        error=error,
    )


def run_replicate(cfg: SimConfig, index: int) -> list[ReplicateFit]:
    """
    Simulate dataset `index` and fit every configured estimator to it.

    The dataset depends only on (cfg.seed, index), so replicates can run in
    any order or process.
    """
    rng = replicate_rng(cfg.seed, index)
    data = generate_dataset(cfg, rng)
    if cfg.missingness == Missingness.MCAR:
        data = apply_mcar(data, cfg, rng)
    acc = []
    for estimator in cfg.estimators:
        fit_cfg = cfg.fit_config(estimator)
        try:
            result = fit(data, fit_cfg)
        except (FitError, FitPreconditionError, WithinCovError) as e:
            acc.append(_failed_fit(index, estimator, str(e)))
            continue
        estimates = result.theta.to_dict()
        se = dict(zip(PARAM_NAMES, (float(v) for v in result.se), strict=True))
        ci = {p: result.ci[p] for p in BETA_NAMES}
        failed = classify_failure(result, fit_cfg)
        error = None
        if not failed:
            try:
                area = ausc_estimate(result.theta.beta, result.beta_cov, cfg.level)
                estimates["ausc"] = area.value
                se["ausc"] = area.se
                ci["ausc"] = (area.lower, area.upper)
            except (UndefinedCurveError, QuadratureError) as e:
                failed, error = True, str(e)
        acc.append(
            ReplicateFit(
                replicate=index,
                estimator=estimator,
                failed=failed,
                converged=result.converged,
                status=str(result.status),
                estimates=estimates,
                se=se,
                ci=ci,
                error=error,
            )
        )
    return acc


def coverage_row(
    truth: dict[str, float],
    intervals: Sequence[dict[str, tuple[float, float]]],
) -> dict[str, float]:
    """
    Fraction of intervals containing the true value, per parameter.

    :param truth: True value of each parameter.
    :param intervals: One mapping of parameter to (lower, upper) per replicate.
    """
    acc = {}
    for p, value in truth.items():
        hits = [ci[p][0] <= value <= ci[p][1] for ci in intervals]
        acc[p] = float(np.mean(hits)) if hits else math.nan
    return acc


@dataclass
class McSummaryRow:
    estimator: Estimator
    parameter: str
    true: float
    mcm: float
    mcsd: float
    ase: float
    coverage: float | None
    failure_rate: float
    attempted: int
    used: int

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "estimator": str(self.estimator),
            "parameter": self.parameter,
            "true": json_float(self.true),
            "mcm": json_float(self.mcm),
            "mcsd": json_float(self.mcsd),
            "ase": json_float(self.ase),
            "coverage": None if self.coverage is None else json_float(self.coverage),
            "failure_rate": self.failure_rate,
            "attempted": self.attempted,
            "used": self.used,
        }


@dataclass
class McSummary:
    config: SimConfig
    true_ausc: float
    rows: list[McSummaryRow] = field(default_factory=list)
    replicates: list[ReplicateFit] = field(default_factory=list)

    def row(self, estimator: Estimator | str, parameter: str) -> McSummaryRow:
        for r in self.rows:
            if r.estimator == estimator and r.parameter == parameter:
                return r
        raise KeyError(f"No summary row for {estimator}/{parameter}")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [r.to_json_dict() for r in self.rows], columns=list(SUMMARY_COLUMNS)
        )

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "config": self.config.to_json_dict(),
            "true_ausc": self.true_ausc,
            "rows": [r.to_json_dict() for r in self.rows],
        }

    def to_text(self) -> str:
        lines = [
            "Monte Carlo Summary",
            "===================",
            f"Replicates:  {self.config.replicates:>6}",
            f"Studies:     {self.config.n_studies:>6}",
            f"Thresholds:  {self.config.m_max:>6}  ({self.config.missingness})",
            f"True AUSC:   {self.true_ausc:.4f}",
            "",
            f"{'Estimator':<12} {'Parameter':<9} {'True':>7} {'MCM':>8} {'MCSD':>7} "
            f"{'ASE':>7} {'Cover':>6} {'Fail':>6}",
        ]
        for r in self.rows:
            cover = f"{r.coverage:6.3f}" if r.coverage is not None else f"{'--':>6}"
            lines.append(
                f"{r.estimator:<12} {r.parameter:<9} {r.true:7.3f} {r.mcm:8.3f} "
                f"{r.mcsd:7.3f} {r.ase:7.3f} {cover} {r.failure_rate:6.3f}"
            )
        return "\n".join(lines)


def _mean(values: list[float]) -> float:
    return float(np.mean(values)) if values else math.nan


def summarize(
    cfg: SimConfig, fits: Iterable[ReplicateFit], true_ausc: float
) -> McSummary:
    """Aggregate replicate fits per estimator over the non-failed replicates."""
    truth = {**cfg.theta.to_dict(), "ausc": true_ausc}
    by_estimator: dict[Estimator, list[ReplicateFit]] = {e: [] for e in cfg.estimators}
    for f in fits:
        by_estimator[f.estimator].append(f)
    summary = McSummary(config=cfg, true_ausc=true_ausc)
    for estimator, group in by_estimator.items():
        used = [f for f in group if not f.failed]
        coverage = coverage_row(
            {p: truth[p] for p in COVERAGE_PARAMS}, [f.ci for f in used]
        )
        failure_rate = (len(group) - len(used)) / len(group) if group else math.nan
        for p in SUMMARY_PARAMS:
            est = [f.estimates[p] for f in used]
            summary.rows.append(
                McSummaryRow(
                    estimator=estimator,
                    parameter=p,
                    true=truth[p],
                    mcm=_mean(est),
                    mcsd=float(np.std(est, ddof=1 if len(est) > 1 else 0)) if est else math.nan,
                    ase=_mean([f.se[p] for f in used]),
                    coverage=coverage.get(p),
                    failure_rate=failure_rate,
                    attempted=len(group),
                    used=len(used),
                )
            )
    return summary


@dataclass
class MonteCarloStats:
    count_replicates: int = 0
    count_fits: int = 0
    count_failures: int = 0


def _replicates(cfg: SimConfig, jobs: int) -> Iterator[list[ReplicateFit]]:
    task = partial(run_replicate, cfg)
    indices = range(cfg.replicates)
    if jobs <= 1:
        yield from map(task, indices)
        return
    chunksize = max(1, cfg.replicates // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        yield from executor.map(task, indices, chunksize=chunksize)


def run_mc(
    cfg: SimConfig,
    jobs: int = 1,
    report_interval: int = DEFAULT_REPORT_INTERVAL,
) -> McSummary:
    """
    Run every replicate and summarize each estimator.

    Results are collected in replicate order, so the summary does not depend
    on `jobs`.
    """
    true_ausc = ausc(cfg.theta.beta)
    stats = MonteCarloStats()
    fits: list[ReplicateFit] = []
    for batch in _replicates(cfg, jobs):
        if stats.count_replicates > 0 and stats.count_replicates % report_interval == 0:
            logger.info("%s", stats)
        stats.count_replicates += 1
        for f in batch:
            stats.count_fits += 1
            if f.failed:
                stats.count_failures += 1
                logger.debug(
                    "Replicate %d %s failed (%s)", f.replicate, f.estimator, f.error or f.status
                )
        fits.extend(batch)
    logger.info("%s (done)", stats)
    summary = summarize(cfg, fits, true_ausc)
    summary.replicates = fits
    return summary


def write_summary_csv(summary: McSummary, path: str | os.PathLike[str]) -> None:
    with atomic_output(path) as tmp:
        summary.to_frame().to_csv(tmp, index=False, float_format="%.10g")


def write_summary_json(summary: McSummary, path: str | os.PathLike[str]) -> None:
    with atomic_output(path) as tmp:
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(summary.to_json_dict(), f, indent=2)
            f.write("\n")


def write_replicate_log(fits: Sequence[ReplicateFit], path: str | os.PathLike[str]) -> None:
    """Per-replicate rows as Avro when the path ends in .avro, else CSV."""
    rows = [f.to_row() for f in fits]
    with atomic_output(path) as tmp:
        if str(path).lower().endswith(".avro"):
            with avro_writer(
                parse_url(tmp).with_mode("wb"), REPLICATE_SCHEMA, codec=AVRO_CODEC
            ) as writer:
                for row in rows:
                    writer.append(row)
        else:
            pd.DataFrame(rows).to_csv(tmp, index=False, float_format="%.10g")
