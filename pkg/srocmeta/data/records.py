# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import json
import logging
import math
import os
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

import numpy as np
import pandas as pd
from avrokit import parse_url
from scipy.special import logit

from srocmeta.base import atomic_output

logger = logging.getLogger(__name__)

CSV_COLUMNS: tuple[str, ...] = (
    "study_id",
    "threshold",
    "tp",
    "tn",
    "n_diseased",
    "n_nondiseased",
)

DEFAULT_CORRECTION_CONSTANT: float = 0.5
DEFAULT_THRESHOLD_TOLERANCE: float = 1e-12


class DataError(ValueError):
    def __init__(
        self, message: str, study_id: str | None = None, line: int | None = None
    ) -> None:
        self.study_id = study_id
        self.line = line
        prefix = []
        if line is not None:
            prefix.append(f"line {line}")
        if study_id is not None:
            prefix.append(f"study {study_id!r}")
        super().__init__(f"{', '.join(prefix)}: {message}" if prefix else message)


class CorrectionMode(StrEnum):
    PER_THRESHOLD = "per-threshold"
    PER_STUDY = "per-study"
    NONE = "none"


@dataclass(frozen=True)
class ContinuityCorrection:
    """
    Policy for proportions that hit 0 or 1.

    A corrected proportion is (count + c) / (n + 2c); with the default c = 0.5
    this is (count + 0.5) / (n + 1).
    """

    mode: CorrectionMode = CorrectionMode.PER_THRESHOLD
    constant: float = DEFAULT_CORRECTION_CONSTANT

    def __post_init__(self) -> None:
        if self.mode != CorrectionMode.NONE and not self.constant > 0:
            raise ValueError(
                f"Correction constant must be positive, got {self.constant}"
            )


DEFAULT_CORRECTION = ContinuityCorrection()


class Invariant(StrEnum):
    EMPTY = "empty"
    LENGTH = "length"
    SAMPLE_SIZE = "sample-size"
    NON_FINITE_THRESHOLD = "non-finite-threshold"
    THRESHOLD_ORDER = "threshold-order"
    DUPLICATE_THRESHOLD = "duplicate-threshold"
    TP_BOUNDS = "tp-bounds"
    TN_BOUNDS = "tn-bounds"
    TP_MONOTONE = "tp-monotone"
    TN_MONOTONE = "tn-monotone"


@dataclass(frozen=True)
class Violation:
    invariant: Invariant
    index: int | None  # 1-based threshold position
    message: str

    def __str__(self) -> str:
        where = f" at j={self.index}" if self.index is not None else ""
        return f"{self.invariant}{where}: {self.message}"


@dataclass(frozen=True)
class StudyRecord:
    """Raw counts of one study at each of its reported thresholds."""

    study_id: str
    thresholds: tuple[float, ...]
    tp: tuple[int, ...]
    tn: tuple[int, ...]
    n_diseased: int
    n_nondiseased: int

    @property
    def m(self) -> int:
        return len(self.thresholds)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "study_id": self.study_id,
            "thresholds": list(self.thresholds),
            "tp": list(self.tp),
            "tn": list(self.tn),
            "n_diseased": self.n_diseased,
            "n_nondiseased": self.n_nondiseased,
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "StudyRecord":
        try:
            return cls(
                study_id=str(data["study_id"]),
                thresholds=tuple(float(x) for x in data["thresholds"]),
                tp=tuple(int(x) for x in data["tp"]),
                tn=tuple(int(x) for x in data["tn"]),
                n_diseased=int(data["n_diseased"]),
                n_nondiseased=int(data["n_nondiseased"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"Malformed study object: {e}") from e


def validate(rec: StudyRecord) -> list[Violation]:
    """
    Check every StudyRecord invariant.

    :param rec: The record to check.
    :return: One entry per violation; empty when the record is valid.
    """
    acc: list[Violation] = []
    m = len(rec.thresholds)
    if m == 0:
        acc.append(Violation(Invariant.EMPTY, None, "no thresholds reported"))
        return acc
    if len(rec.tp) != m or len(rec.tn) != m:
        acc.append(
            Violation(
                Invariant.LENGTH,
                None,
                f"{m} thresholds but {len(rec.tp)} TP and {len(rec.tn)} TN counts",
            )
        )
        return acc
    if rec.n_diseased < 1:
        acc.append(
            Violation(
                Invariant.SAMPLE_SIZE, None, f"n_diseased={rec.n_diseased} < 1"
            )
        )
    if rec.n_nondiseased < 1:
        acc.append(
            Violation(
                Invariant.SAMPLE_SIZE, None, f"n_nondiseased={rec.n_nondiseased} < 1"
            )
        )
    for j, x in enumerate(rec.thresholds, start=1):
        if not math.isfinite(x):
            acc.append(Violation(Invariant.NON_FINITE_THRESHOLD, j, f"x={x}"))
    for j in range(1, m):
        prev, cur = rec.thresholds[j - 1], rec.thresholds[j]
        if cur == prev:
            acc.append(
                Violation(Invariant.DUPLICATE_THRESHOLD, j + 1, f"x={cur} repeated")
            )
        elif cur < prev:
            acc.append(
                Violation(Invariant.THRESHOLD_ORDER, j + 1, f"x={cur} after x={prev}")
            )
    for j, (tp, tn) in enumerate(zip(rec.tp, rec.tn, strict=True), start=1):
        if not 0 <= tp <= rec.n_diseased:
            acc.append(
                Violation(
                    Invariant.TP_BOUNDS,
                    j,
                    f"TP={tp} outside [0, n_diseased={rec.n_diseased}]",
                )
            )
        if not 0 <= tn <= rec.n_nondiseased:
            acc.append(
                Violation(
                    Invariant.TN_BOUNDS,
                    j,
                    f"TN={tn} outside [0, n_nondiseased={rec.n_nondiseased}]",
                )
            )
    for j in range(1, m):
        if rec.tp[j] > rec.tp[j - 1]:
            acc.append(
                Violation(
                    Invariant.TP_MONOTONE,
                    j + 1,
                    f"TP increases from {rec.tp[j - 1]} to {rec.tp[j]}",
                )
            )
        if rec.tn[j] < rec.tn[j - 1]:
            acc.append(
                Violation(
                    Invariant.TN_MONOTONE,
                    j + 1,
                    f"TN decreases from {rec.tn[j - 1]} to {rec.tn[j]}",
                )
            )
    return acc


def _readonly(values: Iterable[float] | np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class LogitStudy:
    study_id: str
    thresholds: np.ndarray
    y1: np.ndarray
    y0: np.ndarray
    var1: np.ndarray
    var0: np.ndarray
    corrected: bool
    n_diseased: int
    n_nondiseased: int
    se: np.ndarray
    sp: np.ndarray

    @property
    def m(self) -> int:
        return len(self.thresholds)


def _corrected_proportions(
    counts: Sequence[int], n: int, policy: ContinuityCorrection
) -> tuple[np.ndarray, bool]:
    c = np.asarray(counts, dtype=float)
    extreme = (c == 0) | (c == n)
    if not extreme.any():
        return c / n, False
    if policy.mode == CorrectionMode.NONE:
        raise DataError("proportion of 0 or 1 with continuity correction disabled")
    if policy.mode == CorrectionMode.PER_STUDY:
        extreme = np.ones_like(extreme)
    k = policy.constant
    return np.where(extreme, (c + k) / (n + 2 * k), c / n), True


def to_logits(
    rec: StudyRecord, policy: ContinuityCorrection = DEFAULT_CORRECTION
) -> LogitStudy:
    """
    Transform a valid record into logit sensitivities and specificities with
    their binomial delta-method variances 1 / (n p (1 - p)).

    :param rec: A record satisfying its invariants.
    :param policy: Continuity correction applied to proportions of 0 or 1.
    :return: The logit-scale study.
    """
    try:
        se, corrected1 = _corrected_proportions(rec.tp, rec.n_diseased, policy)
        sp, corrected0 = _corrected_proportions(rec.tn, rec.n_nondiseased, policy)
    except DataError as e:
        raise DataError(str(e), study_id=rec.study_id) from e
    return LogitStudy(
        study_id=rec.study_id,
        thresholds=_readonly(rec.thresholds),
        y1=_readonly(logit(se)),
        y0=_readonly(logit(sp)),
        var1=_readonly(1.0 / (rec.n_diseased * se * (1.0 - se))),
        var0=_readonly(1.0 / (rec.n_nondiseased * sp * (1.0 - sp))),
        corrected=corrected1 or corrected0,
        n_diseased=rec.n_diseased,
        n_nondiseased=rec.n_nondiseased,
        se=_readonly(se),
        sp=_readonly(sp),
    )


def threshold_registry(
    values: Iterable[float], tolerance: float = DEFAULT_THRESHOLD_TOLERANCE
) -> tuple[float, ...]:
    """Sorted union of threshold values, merging values closer than `tolerance`."""
    acc: list[float] = []
    for x in sorted(values):
        if not acc or x - acc[-1] > tolerance:
            acc.append(float(x))
    return tuple(acc)


@dataclass(frozen=True)
class Dataset:
    studies: tuple[LogitStudy, ...]
    records: tuple[StudyRecord, ...]
    registry: tuple[float, ...]
    policy: ContinuityCorrection = field(default=DEFAULT_CORRECTION)
    tolerance: float = DEFAULT_THRESHOLD_TOLERANCE

    @property
    def n_studies(self) -> int:
        return len(self.studies)

    @classmethod
    def from_records(
        cls,
        records: Iterable[StudyRecord],
        policy: ContinuityCorrection = DEFAULT_CORRECTION,
        tolerance: float = DEFAULT_THRESHOLD_TOLERANCE,
    ) -> "Dataset":
        recs = tuple(records)
        seen: set[str] = set()
        for rec in recs:
            if rec.study_id in seen:
                raise DataError("duplicate study id", study_id=rec.study_id)
            seen.add(rec.study_id)
            violations = validate(rec)
            if violations:
                raise DataError(
                    "; ".join(str(v) for v in violations), study_id=rec.study_id
                )
        studies = tuple(to_logits(rec, policy) for rec in recs)
        registry = threshold_registry(
            (x for rec in recs for x in rec.thresholds), tolerance
        )
        return cls(
            studies=studies,
            records=recs,
            registry=registry,
            policy=policy,
            tolerance=tolerance,
        )

    def to_json_list(self) -> list[dict[str, Any]]:
        return [rec.to_json_dict() for rec in self.records]


def _parse_int(value: str, column: str, line: int) -> int:
    try:
        return int(value.strip())
    except ValueError:
        raise DataError(f"column {column!r}: {value!r} is not an integer", line=line)


def _parse_threshold(value: str, line: int) -> float:
    try:
        x = float(value.strip())
    except ValueError:
        raise DataError(f"column 'threshold': {value!r} is not a number", line=line)
    if not math.isfinite(x):
        raise DataError(f"column 'threshold': {value!r} is not finite", line=line)
    return x


def read_records_csv(
    path: str | os.PathLike[str],
    tolerance: float = DEFAULT_THRESHOLD_TOLERANCE,
) -> list[StudyRecord]:
    """
    Read one row per study x threshold and group the rows into records.

    :param path: Location of the CSV file (anything `parse_url` accepts).
    :param tolerance: Absolute tolerance for duplicate thresholds within a study.
    :return: Records in order of first appearance, thresholds ascending.
    """
    with parse_url(str(path)).with_mode("r") as f:
        try:
            frame = pd.read_csv(
                f, dtype=str, keep_default_na=False, skip_blank_lines=False
            )
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise DataError(f"cannot parse CSV: {e}") from e
    missing = [c for c in CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"missing required column(s): {', '.join(missing)}")
    # Blank lines stay in the frame until here so the index maps to file lines;
    # the header is line 1.
    frame = frame.fillna("")
    frame.index = frame.index + 2
    frame = frame[~frame.map(str.strip).eq("").all(axis=1)]

    grouped: dict[str, list[tuple[int, float, int, int, int, int]]] = {}
    for index, row in zip(frame.index, frame.itertuples(index=False), strict=True):
        line = int(index)
        values = row._asdict()
        study_id = str(values["study_id"]).strip()
        if not study_id:
            raise DataError("empty study_id", line=line)
        grouped.setdefault(study_id, []).append(
            (
                line,
                _parse_threshold(values["threshold"], line),
                _parse_int(values["tp"], "tp", line),
                _parse_int(values["tn"], "tn", line),
                _parse_int(values["n_diseased"], "n_diseased", line),
                _parse_int(values["n_nondiseased"], "n_nondiseased", line),
            )
        )

    records: list[StudyRecord] = []
    for study_id, rows in grouped.items():
        rows.sort(key=lambda r: r[1])
        for prev, cur in zip(rows, rows[1:]):
            if cur[1] - prev[1] <= tolerance:
                raise DataError(
                    f"duplicate (study, threshold) pair at threshold {cur[1]}",
                    study_id=study_id,
                    line=cur[0],
                )
        sizes = {(r[4], r[5]) for r in rows}
        if len(sizes) != 1:
            raise DataError(
                "n_diseased/n_nondiseased differ between rows",
                study_id=study_id,
                line=rows[0][0],
            )
        n1, n0 = sizes.pop()
        records.append(
            StudyRecord(
                study_id=study_id,
                thresholds=tuple(r[1] for r in rows),
                tp=tuple(r[2] for r in rows),
                tn=tuple(r[3] for r in rows),
                n_diseased=n1,
                n_nondiseased=n0,
            )
        )
    logger.debug("Read %d rows for %d studies from %s", len(frame), len(records), path)
    return records


def ingest_csv(
    path: str | os.PathLike[str],
    policy: ContinuityCorrection = DEFAULT_CORRECTION,
    tolerance: float = DEFAULT_THRESHOLD_TOLERANCE,
) -> Dataset:
    """Read, validate and transform a study CSV into a Dataset."""
    return Dataset.from_records(read_records_csv(path, tolerance), policy, tolerance)


def load_json(
    path: str | os.PathLike[str],
    policy: ContinuityCorrection = DEFAULT_CORRECTION,
    tolerance: float = DEFAULT_THRESHOLD_TOLERANCE,
) -> Dataset:
    with parse_url(str(path)).with_mode("r") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise DataError(f"cannot parse JSON: {e}") from e
    if not isinstance(data, list):
        raise DataError("expected a JSON array of study objects")
    return Dataset.from_records(
        (StudyRecord.from_json_dict(d) for d in data), policy, tolerance
    )


def dump_json(dataset: Dataset, path: str | os.PathLike[str]) -> None:
    with atomic_output(path) as tmp:
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(dataset.to_json_list(), f, indent=2)
            f.write("\n")


def load_dataset(
    path: str | os.PathLike[str],
    policy: ContinuityCorrection = DEFAULT_CORRECTION,
    tolerance: float = DEFAULT_THRESHOLD_TOLERANCE,
) -> Dataset:
    """Load a dataset from CSV, or from its JSON mirror when the path ends in .json."""
    if str(path).lower().endswith(".json"):
        return load_json(path, policy, tolerance)
    return ingest_csv(path, policy, tolerance)
