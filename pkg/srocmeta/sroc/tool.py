# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import argparse
import json
import logging
from dataclasses import dataclass, field

from avrokit import parse_url

from srocmeta.base import EXIT_ERROR, EXIT_FAILURE, EXIT_OK
from srocmeta.data.records import Dataset, load_dataset
from srocmeta.data.tool import ReportFormat
from srocmeta.fit.config import DEFAULT_LEVEL
from srocmeta.fit.estimate import FitError, classify_failure, fit
from srocmeta.fit.result import FitResult
from srocmeta.fit.tool import add_estimation_arguments, config_from_args, correction_from_args

from .curve import (
    DEFAULT_GRID_SIZE,
    AuscEstimate,
    QuadratureError,
    SrocPoint,
    UndefinedCurveError,
    ausc_estimate,
    curve_grid,
    sroc_points,
)
from .regions import SummaryPoint, YoudenPoint, summary_point, youden_optimal
from .render import render_svg, write_curve_csv, write_svg

logger = logging.getLogger(__name__)


@dataclass
class SrocToolResult:
    fit: FitResult
    ausc: AuscEstimate
    points: list[SrocPoint] = field(default_factory=list)
    youden: YoudenPoint | None = None
    summary: SummaryPoint | None = None

    def to_text(self) -> str:
        pct = f"{self.ausc.level * 100:g}% CI"
        lines = [
            f"Summary ROC ({self.fit.method}, {self.fit.criterion})",
            "=" * len(f"Summary ROC ({self.fit.method}, {self.fit.criterion})"),
            f"AUSC:        {self.ausc.value:.3f}",
            f"SE:          {self.ausc.se:.3f}",
            f"{pct + ':':<13}({self.ausc.lower:.3f}, {self.ausc.upper:.3f})  (logit scale)",
            f"Grid:        {len(self.points):>6}  points",
        ]
        if self.youden is not None:
            lines.append(self.youden.to_text())
        return "\n".join(lines)

    def to_json_dict(self) -> dict:
        out: dict = {
            "method": str(self.fit.method),
            "criterion": str(self.fit.criterion),
            **self.ausc.to_json_dict(),
            "grid": len(self.points),
        }
        if self.youden is not None:
            out["youden"] = {
                "threshold": self.youden.threshold,
                "sse": self.youden.sse,
                "ssp": self.youden.ssp,
                "index": self.youden.index,
            }
        if self.summary is not None:
            out["summary_point"] = self.summary.to_json_dict()
        return out


class SrocTool:
    def name(self) -> str:
        return "sroc"

    def load(
        self, input_url: str, args: argparse.Namespace
    ) -> tuple[FitResult, Dataset | None]:
        """Read a stored fit, or fit a dataset with the estimation flags."""
        if input_url.lower().endswith(".json"):
            with parse_url(input_url).with_mode("r") as f:
                data = json.load(f)
            if isinstance(data, dict):
                return FitResult.from_json_dict(data), None
        dataset = load_dataset(input_url, correction_from_args(args))
        return fit(dataset, config_from_args(args)), dataset

    def sroc(
        self,
        result: FitResult,
        grid_size: int = DEFAULT_GRID_SIZE,
        level: float = DEFAULT_LEVEL,
        youden: bool = False,
        refine: bool = False,
        threshold: float | None = None,
    ) -> SrocToolResult:
        beta = result.theta.beta
        out = SrocToolResult(
            fit=result,
            ausc=ausc_estimate(beta, result.beta_cov, level),
            points=sroc_points(beta, result.beta_cov, curve_grid(grid_size), level),
        )
        if youden and result.registry:
            out.youden = youden_optimal(result, refine=refine)
        x = threshold if threshold is not None else (out.youden.threshold if out.youden else None)
        if x is not None and result.has_covariance:
            out.summary = summary_point(x, result, level)
        return out

    def configure(self, subparsers: argparse._SubParsersAction) -> None:
        parser = subparsers.add_parser(
            self.name(), help="Report the summary ROC curve, AUSC and optimal threshold"
        )
        parser.add_argument(
            "input",
            help="Fit result JSON written by 'fit', or a dataset CSV/JSON to fit first",
        )
        parser.add_argument(
            "-o",
            "--output",
            help="Write the curve as CSV (t,sroc,variance,lower,upper) to this path",
        )
        parser.add_argument(
            "--format",
            type=ReportFormat,
            choices=list(ReportFormat),
            default=ReportFormat.TEXT,
            help="Format of the report printed to stdout (default: text)",
        )
        parser.add_argument(
            "--grid",
            type=int,
            default=DEFAULT_GRID_SIZE,
            help=f"Number of false-positive rates on (0, 1) for the curve (default: {DEFAULT_GRID_SIZE})",
        )
        parser.add_argument(
            "--level",
            type=float,
            default=DEFAULT_LEVEL,
            help=f"Level of bands, intervals and regions (default: {DEFAULT_LEVEL})",
        )
        parser.add_argument(
            "--youden",
            action="store_true",
            help="Report the Youden-optimal threshold among the observed thresholds",
        )
        parser.add_argument(
            "--refine",
            action="store_true",
            help="With --youden, search continuously between the observed thresholds",
        )
        parser.add_argument(
            "--threshold",
            type=float,
            help="Threshold of the summary point drawn in the SVG (default: the Youden optimum)",
        )
        parser.add_argument(
            "--svg",
            help="Write an SVG plot of the curve, bands, studies and regions to this path",
        )
        parser.add_argument(
            "--data",
            help="Dataset whose study points are drawn when the input is a fit result",
        )
        add_estimation_arguments(parser)

    def run(self, args: argparse.Namespace) -> int:
        try:
            result, dataset = self.load(args.input, args)
            if dataset is None and args.data:
                dataset = load_dataset(args.data, correction_from_args(args))
        except (ValueError, FitError, OSError) as e:
            logger.error("Cannot load %s: %s", args.input, e)
            return EXIT_ERROR
        try:
            report = self.sroc(
                result,
                grid_size=args.grid,
                level=args.level,
                youden=args.youden or args.svg is not None,
                refine=args.refine,
                threshold=args.threshold,
            )
        except (UndefinedCurveError, QuadratureError) as e:
            logger.error("Cannot evaluate the summary ROC curve: %s", e)
            return EXIT_FAILURE
        except ValueError as e:
            logger.error("%s", e)
            return EXIT_ERROR
        try:
            if args.output:
                write_curve_csv(report.points, args.output)
            if args.svg:
                tree = render_svg(
                    report.points,
                    dataset.studies if dataset is not None else (),
                    report.summary,
                )
                write_svg(tree, args.svg)
        except OSError as e:
            logger.error("Cannot write output: %s", e)
            return EXIT_ERROR
        if not args.youden:
            report.youden = None
        if args.format == ReportFormat.JSON:
            print(json.dumps(report.to_json_dict(), indent=2))
        else:
            print(report.to_text())
        return EXIT_FAILURE if classify_failure(result) else EXIT_OK
