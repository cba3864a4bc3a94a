# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import argparse
import json
import logging

from avrokit import parse_url

from srocmeta.base import EXIT_ERROR, EXIT_FAILURE, EXIT_OK, atomic_output
from srocmeta.data.records import (
    DEFAULT_CORRECTION_CONSTANT,
    ContinuityCorrection,
    CorrectionMode,
    load_dataset,
)
from srocmeta.data.tool import ReportFormat
from srocmeta.model.likelihood import Criterion, Method

from .config import (
    DEFAULT_CRITERION,
    DEFAULT_LEVEL,
    DEFAULT_MAX_ITER,
    DEFAULT_METHOD,
    DEFAULT_MULTISTART,
    FitConfig,
)
from .estimate import FitError, classify_failure, fit
from .result import FitResult

logger = logging.getLogger(__name__)


def write_fit_json(result: FitResult, path: str) -> None:
    with atomic_output(path) as tmp:
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(result.to_json_dict(), f, indent=2)
            f.write("\n")


def read_fit_json(path: str) -> FitResult:
    with parse_url(path).with_mode("r") as f:
        return FitResult.from_json_dict(json.load(f))


def add_estimation_arguments(parser: argparse.ArgumentParser) -> None:
    """Flags shared by every command that fits a dataset."""
    parser.add_argument(
        "--method",
        type=Method,
        choices=list(Method),
        default=DEFAULT_METHOD,
        help=f"Within-study covariance: diagonal pseudo-likelihood or full Riley (default: {DEFAULT_METHOD})",
    )
    parser.add_argument(
        "--criterion",
        type=Criterion,
        choices=list(Criterion),
        default=DEFAULT_CRITERION,
        help=f"Maximum or restricted maximum likelihood (default: {DEFAULT_CRITERION})",
    )
    parser.add_argument(
        "--multistart",
        type=int,
        default=DEFAULT_MULTISTART,
        help=f"Number of optimizer start points (default: {DEFAULT_MULTISTART})",
    )
    parser.add_argument(
        "--max-iter",
        dest="max_iter",
        type=int,
        default=DEFAULT_MAX_ITER,
        help=f"Maximum optimizer iterations per start (default: {DEFAULT_MAX_ITER})",
    )
    parser.add_argument(
        "--correction",
        type=CorrectionMode,
        choices=list(CorrectionMode),
        default=CorrectionMode.PER_THRESHOLD,
        help="Continuity correction for proportions of 0 or 1 (default: per-threshold)",
    )
    parser.add_argument(
        "--correction-constant",
        dest="correction_constant",
        type=float,
        default=DEFAULT_CORRECTION_CONSTANT,
        help=f"Constant added to counts by the continuity correction (default: {DEFAULT_CORRECTION_CONSTANT})",
    )


def config_from_args(args: argparse.Namespace) -> FitConfig:
    return FitConfig(
        method=args.method,
        criterion=args.criterion,
        max_iter=args.max_iter,
        multistart=args.multistart,
        level=args.level,
    )


def correction_from_args(args: argparse.Namespace) -> ContinuityCorrection:
    return ContinuityCorrection(args.correction, args.correction_constant)


class FitTool:
    def name(self) -> str:
        return "fit"

    def fit(
        self,
        input_url: str,
        config: FitConfig,
        correction: ContinuityCorrection | None = None,
    ) -> FitResult:
        data = load_dataset(input_url, correction or ContinuityCorrection())
        logger.debug(
            "Loaded %d studies with %d distinct thresholds from %s",
            data.n_studies,
            len(data.registry),
            input_url,
        )
        return fit(data, config)

    def configure(self, subparsers: argparse._SubParsersAction) -> None:
        parser = subparsers.add_parser(
            self.name(), help="Estimate the summary ROC model from a study dataset"
        )
        parser.add_argument("input", help="Dataset CSV or its JSON mirror")
        parser.add_argument(
            "-o",
            "--output",
            help="Write the fit result as JSON to this path",
        )
        parser.add_argument(
            "--format",
            type=ReportFormat,
            choices=list(ReportFormat),
            default=ReportFormat.TEXT,
            help="Format of the report printed to stdout (default: text)",
        )
        parser.add_argument(
            "--level",
            type=float,
            default=DEFAULT_LEVEL,
            help=f"Confidence level of the Wald intervals (default: {DEFAULT_LEVEL})",
        )
        add_estimation_arguments(parser)

    def run(self, args: argparse.Namespace) -> int:
        try:
            config = config_from_args(args)
            result = self.fit(args.input, config, correction_from_args(args))
        except (ValueError, FitError, OSError) as e:
            logger.error("Cannot fit %s: %s", args.input, e)
            return EXIT_ERROR
        if args.output:
            try:
                write_fit_json(result, args.output)
            except OSError as e:
                logger.error("Cannot write %s: %s", args.output, e)
                return EXIT_ERROR
        if args.format == ReportFormat.JSON:
            print(json.dumps(result.to_json_dict(), indent=2))
        else:
            print(result.to_text())
        if classify_failure(result, config):
            logger.warning(
                "Fit classified as a failure (status=%s, boundary=%s, singular=%s)",
                result.status,
                [k for k, v in result.boundary_flags.items() if v],
                result.j_singular,
            )
            return EXIT_FAILURE
        return EXIT_OK
