# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import argparse
import json
import logging
import os
from dataclasses import dataclass, field
from enum import StrEnum

from avrokit import parse_url

from srocmeta.base import EXIT_ERROR, EXIT_OK, atomic_output

from .records import (
    DEFAULT_THRESHOLD_TOLERANCE,
    DataError,
    StudyRecord,
    Violation,
    read_records_csv,
    threshold_registry,
    validate,
)

logger = logging.getLogger(__name__)


class ReportFormat(StrEnum):
    TEXT = "text"
    JSON = "json"


@dataclass
class ValidateToolResult:
    count_studies: int = 0
    count_rows: int = 0
    registry: tuple[float, ...] = ()
    violations: dict[str, list[Violation]] = field(default_factory=dict)

    @property
    def count_invalid(self) -> int:
        return sum(1 for v in self.violations.values() if v)

    def to_text(self, input_url: str) -> str:
        lines = [
            "Dataset Validation",
            "==================",
            f"Input:       {input_url}",
            f"Studies:     {self.count_studies:>6}",
            f"Rows:        {self.count_rows:>6}",
            f"Thresholds:  {len(self.registry):>6}  (distinct)",
            f"Invalid:     {self.count_invalid:>6}",
        ]
        for study_id, violations in self.violations.items():
            for v in violations:
                lines.append(f"  {study_id}: {v}")
        return "\n".join(lines)

    def to_json_dict(self, input_url: str) -> dict:
        return {
            "input": input_url,
            "studies": self.count_studies,
            "rows": self.count_rows,
            "registry": list(self.registry),
            "invalid": self.count_invalid,
            "violations": {
                study_id: [
                    {"invariant": str(v.invariant), "index": v.index, "message": v.message}
                    for v in violations
                ]
                for study_id, violations in self.violations.items()
                if violations
            },
        }


class ValidateTool:
    def name(self) -> str:
        return "validate"

    def load_records(
        self, input_url: str, tolerance: float = DEFAULT_THRESHOLD_TOLERANCE
    ) -> list[StudyRecord]:
        if input_url.lower().endswith(".json"):
            with parse_url(input_url).with_mode("r") as f:
                data = json.load(f)
            if not isinstance(data, list):
                raise DataError("expected a JSON array of study objects")
            return [StudyRecord.from_json_dict(d) for d in data]
        return read_records_csv(input_url, tolerance)

    def validate(
        self, input_url: str, tolerance: float = DEFAULT_THRESHOLD_TOLERANCE
    ) -> ValidateToolResult:
        records = self.load_records(input_url, tolerance)
        result = ValidateToolResult(
            count_studies=len(records),
            count_rows=sum(rec.m for rec in records),
            registry=threshold_registry(
                (x for rec in records for x in rec.thresholds), tolerance
            ),
        )
        for rec in records:
            result.violations[rec.study_id] = validate(rec)
        logger.debug("Validated %d studies from %s", len(records), input_url)
        return result

    def configure(self, subparsers: argparse._SubParsersAction) -> None:
        parser = subparsers.add_parser(
            self.name(), help="Check a study dataset against its invariants"
        )
        parser.add_argument(
            "input",
            help="Dataset CSV (study_id,threshold,tp,tn,n_diseased,n_nondiseased) or its JSON mirror",
        )
        parser.add_argument(
            "-o",
            "--output",
            help="Write the report to this path instead of stdout",
        )
        parser.add_argument(
            "--format",
            type=ReportFormat,
            choices=list(ReportFormat),
            default=ReportFormat.TEXT,
            help="Report format (default: text)",
        )
        parser.add_argument(
            "--tolerance",
            type=float,
            default=DEFAULT_THRESHOLD_TOLERANCE,
            help=f"Absolute tolerance for equal thresholds (default: {DEFAULT_THRESHOLD_TOLERANCE})",
        )

    def run(self, args: argparse.Namespace) -> int:
        try:
            result = self.validate(args.input, args.tolerance)
        except (DataError, OSError, json.JSONDecodeError) as e:
            logger.error("Cannot read %s: %s", args.input, e)
            return EXIT_ERROR
        if args.format == ReportFormat.JSON:
            report = json.dumps(result.to_json_dict(args.input), indent=2)
        else:
            report = result.to_text(args.input)
        if args.output:
            with atomic_output(os.fspath(args.output)) as tmp:
                with open(tmp, "w", encoding="utf-8") as f:
                    f.write(report + "\n")
        else:
            print(report)
        return EXIT_OK if result.count_invalid == 0 else EXIT_ERROR
