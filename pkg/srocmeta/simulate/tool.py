# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import argparse
import logging
import os
from enum import StrEnum

from srocmeta.base import EXIT_ERROR, EXIT_OK, SEED_ENV

from .config import ConfigError, SimConfig, load_config, seed_from_env
from .harness import (
    DEFAULT_REPORT_INTERVAL,
    McSummary,
    run_mc,
    write_replicate_log,
    write_summary_csv,
    write_summary_json,
)

logger = logging.getLogger(__name__)

DEFAULT_JOBS: int = 1


class SummaryFormat(StrEnum):
    CSV = "csv"
    JSON = "json"


class SimulateTool:
    def name(self) -> str:
        return "simulate"

    def load_config(
        self,
        config_url: str | None,
        seed: int | None = None,
        replicates: int | None = None,
    ) -> SimConfig:
        """
        Read the config (or use the defaults), then apply the seed from the
        environment, and finally the explicit flag overrides.
        """
        cfg = load_config(config_url) if config_url else SimConfig()
        cfg = cfg.with_overrides(seed=seed_from_env())
        return cfg.with_overrides(seed=seed, replicates=replicates)

    def simulate(
        self,
        cfg: SimConfig,
        jobs: int = DEFAULT_JOBS,
        report_interval: int = DEFAULT_REPORT_INTERVAL,
    ) -> McSummary:
        logger.info(
            "Simulating %d replicates of %d studies (m_max=%d, %s) with seed %d",
            cfg.replicates,
            cfg.n_studies,
            cfg.m_max,
            cfg.missingness,
            cfg.seed,
        )
        return run_mc(cfg, jobs=jobs, report_interval=report_interval)

    def configure(self, subparsers: argparse._SubParsersAction) -> None:
        parser = subparsers.add_parser(
            self.name(), help="Run a Monte Carlo study of the estimators"
        )
        parser.add_argument(
            "--config",
            help="Simulation config JSON (default: built-in scenario)",
        )
        parser.add_argument(
            "--seed",
            type=int,
            help=f"RNG seed, overriding the config and ${SEED_ENV}",
        )
        parser.add_argument(
            "--replicates",
            type=int,
            help="Number of replicates, overriding the config",
        )
        parser.add_argument(
            "--jobs",
            type=int,
            default=DEFAULT_JOBS,
            help=f"Worker processes for the replicates (default: {DEFAULT_JOBS})",
        )
        parser.add_argument(
            "-o",
            "--output",
            help="Write the summary to this path",
        )
        parser.add_argument(
            "--format",
            type=SummaryFormat,
            choices=list(SummaryFormat),
            help="Summary file format (default: from the output extension, else csv)",
        )
        parser.add_argument(
            "--replicate-log",
            dest="replicate_log",
            help="Write one row per replicate and estimator (.avro for Avro, else CSV)",
        )
        parser.add_argument(
            "--report-interval",
            dest="report_interval",
            type=int,
            default=DEFAULT_REPORT_INTERVAL,
            help=f"Log progress every N replicates (default: {DEFAULT_REPORT_INTERVAL})",
        )

    def run(self, args: argparse.Namespace) -> int:
        try:
            cfg = self.load_config(args.config, args.seed, args.replicates)
        except (ConfigError, OSError) as e:
            logger.error("Invalid simulation config: %s", e)
            return EXIT_ERROR
        if args.jobs < 1 or args.report_interval < 1:
            logger.error("--jobs and --report-interval must be >= 1")
            return EXIT_ERROR
        summary = self.simulate(cfg, jobs=args.jobs, report_interval=args.report_interval)
        try:
            if args.output:
                fmt = args.format or (
                    SummaryFormat.JSON
                    if os.fspath(args.output).lower().endswith(".json")
                    else SummaryFormat.CSV
                )
                if fmt == SummaryFormat.JSON:
                    write_summary_json(summary, args.output)
                else:
                    write_summary_csv(summary, args.output)
            if args.replicate_log:
                write_replicate_log(summary.replicates, args.replicate_log)
        except OSError as e:
            logger.error("Cannot write output: %s", e)
            return EXIT_ERROR
        print(summary.to_text())
        return EXIT_OK
