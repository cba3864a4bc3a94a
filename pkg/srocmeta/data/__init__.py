# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

from .records import (
    ContinuityCorrection,
    CorrectionMode,
    DataError,
    Dataset,
    Invariant,
    LogitStudy,
    StudyRecord,
    Violation,
    dump_json,
    ingest_csv,
    load_dataset,
    load_json,
    read_records_csv,
    to_logits,
    validate,
)
from .tool import ValidateTool

__all__ = [
    "ContinuityCorrection",
    "CorrectionMode",
    "DataError",
    "Dataset",
    "Invariant",
    "LogitStudy",
    "StudyRecord",
    "ValidateTool",
    "Violation",
    "dump_json",
    "ingest_csv",
    "load_dataset",
    "load_json",
    "read_records_csv",
    "to_logits",
    "validate",
]
