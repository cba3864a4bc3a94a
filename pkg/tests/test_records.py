# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import argparse
import json
import math
import os
import tempfile

import numpy as np
import pytest
from faker import Faker

from srocmeta.base import EXIT_ERROR, EXIT_OK
from srocmeta.data.records import (
    CSV_COLUMNS,
    ContinuityCorrection,
    CorrectionMode,
    DataError,
    Dataset,
    Invariant,
    StudyRecord,
    dump_json,
    ingest_csv,
    load_dataset,
    load_json,
    read_records_csv,
    threshold_registry,
    to_logits,
    validate,
)
from srocmeta.data.tool import ReportFormat, ValidateTool

# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def write_csv(path: str, rows: list[tuple]) -> None:
    with open(path, "w") as f:
        f.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            f.write(",".join(str(v) for v in row) + "\n")


def record(**kwargs) -> StudyRecord:
    defaults = dict(
        study_id="A",
        thresholds=(0.0, 1.0, 2.0),
        tp=(40, 30, 10),
        tn=(20, 35, 45),
        n_diseased=50,
        n_nondiseased=50,
    )
    defaults.update(kwargs)
    return StudyRecord(**defaults)


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


class TestValidate:
    def test_valid_record(self):
        assert validate(record()) == []

    def test_tp_increasing(self):
        violations = validate(record(tp=(30, 40, 10)))
        assert [v.invariant for v in violations] == [Invariant.TP_MONOTONE]
        assert violations[0].index == 2

    def test_tn_decreasing(self):
        violations = validate(record(tn=(20, 10, 45)))
        assert [v.invariant for v in violations] == [Invariant.TN_MONOTONE]

    def test_counts_out_of_bounds(self):
        violations = validate(record(tp=(60, 30, 10), tn=(-1, 35, 45)))
        kinds = {v.invariant for v in violations}
        assert Invariant.TP_BOUNDS in kinds
        assert Invariant.TN_BOUNDS in kinds

    def test_unsorted_and_duplicate_thresholds(self):
        assert Invariant.THRESHOLD_ORDER in {
            v.invariant for v in validate(record(thresholds=(0.0, 2.0, 1.0)))
        }
        assert Invariant.DUPLICATE_THRESHOLD in {
            v.invariant for v in validate(record(thresholds=(0.0, 1.0, 1.0)))
        }

    def test_non_finite_threshold(self):
        violations = validate(record(thresholds=(0.0, 1.0, math.inf)))
        assert Invariant.NON_FINITE_THRESHOLD in {v.invariant for v in violations}

    def test_empty_and_length(self):
        assert validate(record(thresholds=(), tp=(), tn=()))[0].invariant == Invariant.EMPTY
        assert validate(record(tp=(40, 30)))[0].invariant == Invariant.LENGTH

    def test_sample_size(self):
        violations = validate(record(n_diseased=0, tp=(0, 0, 0)))
        assert Invariant.SAMPLE_SIZE in {v.invariant for v in violations}

    def test_reports_every_violation(self):
        violations = validate(record(tp=(30, 40, 60), tn=(20, 10, 45)))
        assert len(violations) >= 3


# ---------------------------------------------------------------------------
# to_logits
# ---------------------------------------------------------------------------


class TestToLogits:
    def test_plain_proportions(self):
        study = to_logits(record())
        assert not study.corrected
        assert study.se == pytest.approx(np.array([0.8, 0.6, 0.2]))
        assert study.y1[0] == pytest.approx(math.log(0.8 / 0.2))
        assert study.var1[0] == pytest.approx(1.0 / (50 * 0.8 * 0.2))
        assert study.sp == pytest.approx(np.array([0.4, 0.7, 0.9]))
        assert study.var0[1] == pytest.approx(1.0 / (50 * 0.7 * 0.3))

    def test_per_threshold_correction(self):
        study = to_logits(record(tp=(50, 30, 0)))
        assert study.corrected
        assert study.se[0] == pytest.approx(50.5 / 51)
        assert study.se[1] == pytest.approx(0.6)
        assert study.se[2] == pytest.approx(0.5 / 51)
        assert np.all(np.isfinite(study.y1))

    def test_corrected_all_positive(self):
        study = to_logits(record(thresholds=(0.0,), tp=(100,), tn=(50,), n_diseased=100))
        assert study.se[0] == pytest.approx(100.5 / 101)
        assert study.se[0] == pytest.approx(0.99505, abs=1e-5)
        assert study.y1[0] == pytest.approx(math.log(100.5 / 0.5))

    def test_binomial_variance(self):
        study = to_logits(record(thresholds=(0.0,), tp=(80,), tn=(50,), n_diseased=200))
        assert study.var1[0] == pytest.approx(1 / 48)

    def test_per_study_correction(self):
        policy = ContinuityCorrection(CorrectionMode.PER_STUDY)
        study = to_logits(record(tp=(50, 30, 10)), policy)
        assert study.se[1] == pytest.approx(30.5 / 51)
        assert study.sp[0] == pytest.approx(20 / 50)

    def test_correction_disabled(self):
        policy = ContinuityCorrection(CorrectionMode.NONE)
        with pytest.raises(DataError, match="'A'"):
            to_logits(record(tp=(50, 30, 10)), policy)

    def test_arrays_read_only(self):
        study = to_logits(record())
        with pytest.raises(ValueError):
            study.y1[0] = 0.0


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


class TestReadRecordsCsv:
    def test_groups_rows_in_first_appearance_order(self):
        fake = Faker()
        Faker.seed(7)
        ids = [fake.unique.bothify("study-####") for _ in range(3)]
        rows = []
        for sid in ids:
            # Rows deliberately out of threshold order.
            rows.append((sid, 2.0, 10, 45, 50, 50))
            rows.append((sid, 0.0, 40, 20, 50, 50))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.csv")
            write_csv(path, rows)
            records = read_records_csv(path)
        assert [r.study_id for r in records] == ids
        for r in records:
            assert r.thresholds == (0.0, 2.0)
            assert r.tp == (40, 10)

    def test_missing_column(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.csv")
            with open(path, "w") as f:
                f.write("study_id,threshold,tp\nA,0,1\n")
            with pytest.raises(DataError, match="missing required column"):
                read_records_csv(path)

    def test_bad_integer_reports_line(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.csv")
            write_csv(path, [("A", 0.0, 40, 20, 50, 50), ("A", 1.0, "x", 20, 50, 50)])
            with pytest.raises(DataError) as e:
                read_records_csv(path)
        assert e.value.line == 3

    def test_line_numbers_count_blank_lines(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.csv")
            with open(path, "w") as f:
                f.write(",".join(CSV_COLUMNS) + "\n")
                f.write("A,0,40,20,50,50\n")
                f.write("\n")
                f.write("\n")
                f.write("A,1,x,20,50,50\n")
            with pytest.raises(DataError, match="^line 5") as e:
                read_records_csv(path)
        assert e.value.line == 5

    def test_blank_lines_are_skipped(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.csv")
            with open(path, "w") as f:
                f.write(",".join(CSV_COLUMNS) + "\n")
                f.write("A,0,40,20,50,50\n\n")
                f.write("A,1,30,35,50,50\n\n")
            records = read_records_csv(path)
        assert len(records) == 1
        assert records[0].tp == (40, 30)

    def test_duplicate_threshold(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.csv")
            write_csv(path, [("A", 0.5, 40, 20, 50, 50), ("A", 0.5, 30, 30, 50, 50)])
            with pytest.raises(DataError, match="duplicate"):
                read_records_csv(path)

    def test_inconsistent_sample_sizes(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.csv")
            write_csv(path, [("A", 0.0, 40, 20, 50, 50), ("A", 1.0, 30, 30, 60, 50)])
            with pytest.raises(DataError, match="differ"):
                read_records_csv(path)

    def test_ingest_rejects_invalid_study(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.csv")
            write_csv(path, [("A", 0.0, 10, 20, 50, 50), ("A", 1.0, 30, 30, 50, 50)])
            with pytest.raises(DataError, match="tp-monotone"):
                ingest_csv(path)


class TestDataset:
    def test_registry_is_sorted_union(self):
        ds = Dataset.from_records(
            [
                record(study_id="A", thresholds=(0.0, 1.0, 2.0)),
                record(study_id="B", thresholds=(0.5, 1.0, 3.0)),
            ]
        )
        assert ds.registry == (0.0, 0.5, 1.0, 2.0, 3.0)
        assert ds.n_studies == 2

    def test_registry_tolerance(self):
        assert threshold_registry([1.0, 1.0 + 1e-14, 2.0]) == (1.0, 2.0)

    def test_duplicate_study_id(self):
        with pytest.raises(DataError, match="duplicate study id"):
            Dataset.from_records([record(), record()])

    def test_json_mirror(self):
        ds = Dataset.from_records([record(study_id="A"), record(study_id="B", tp=(45, 20, 5))])
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.json")
            dump_json(ds, path)
            loaded = load_json(path)
            via_dispatch = load_dataset(path)
        assert loaded.records == ds.records
        assert via_dispatch.registry == ds.registry


# ---------------------------------------------------------------------------
# ValidateTool
# ---------------------------------------------------------------------------


class TestValidateTool:
    def args(self, path: str, **kwargs) -> argparse.Namespace:
        defaults = dict(input=path, output=None, format=ReportFormat.TEXT, tolerance=1e-12)
        defaults.update(kwargs)
        return argparse.Namespace(**defaults)

    def test_clean_dataset(self, capsys):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.csv")
            write_csv(path, [("A", 0.0, 40, 20, 50, 50), ("B", 1.0, 30, 30, 50, 50)])
            assert ValidateTool().run(self.args(path)) == EXIT_OK
        out = capsys.readouterr().out
        assert "Studies:" in out
        assert out.split("Invalid:")[1].split()[0] == "0"

    def test_invalid_dataset_json_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.csv")
            report = os.path.join(tmp, "report.json")
            write_csv(path, [("A", 0.0, 10, 20, 50, 50), ("A", 1.0, 30, 30, 50, 50)])
            code = ValidateTool().run(
                self.args(path, output=report, format=ReportFormat.JSON)
            )
            with open(report) as f:
                data = json.load(f)
        assert code == EXIT_ERROR
        assert data["invalid"] == 1
        assert data["violations"]["A"][0]["invariant"] == "tp-monotone"

    def test_unreadable_input(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "missing.csv")
            assert ValidateTool().run(self.args(path)) == EXIT_ERROR
