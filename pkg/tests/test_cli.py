# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import argparse
import dataclasses
import json
import os
import tempfile
import xml.etree.ElementTree as ET

import pandas as pd
import pytest

from srocmeta.__main__ import build_parser, main
from srocmeta.base import EXIT_ERROR, EXIT_FAILURE, EXIT_OK, SEED_ENV
from srocmeta.data.records import CSV_COLUMNS, Dataset, StudyRecord, dump_json
from srocmeta.model.likelihood import Criterion, Method
from srocmeta.simulate.config import DEFAULT_THETA, SimConfig
from srocmeta.simulate.generate import generate_dataset, replicate_rng
from srocmeta.sroc.render import CURVE_COLUMNS, SVG_NS

# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def write_csv(dataset: Dataset, path: str) -> None:
    rows = [
        (rec.study_id, x, tp, tn, rec.n_diseased, rec.n_nondiseased)
        for rec in dataset.records
        for x, tp, tn in zip(rec.thresholds, rec.tp, rec.tn, strict=True)
    ]
    pd.DataFrame(rows, columns=list(CSV_COLUMNS)).to_csv(path, index=False)


def heterogeneous_dataset() -> Dataset:
    theta = dataclasses.replace(DEFAULT_THETA, tau1_sq=0.5, tau0_sq=0.5, rho=0.0)
    cfg = SimConfig(theta=theta, n_studies=40, m_max=4, n_range=(100, 300))
    return generate_dataset(cfg, replicate_rng(21, 0))


def subparsers(parser: argparse.ArgumentParser) -> dict[str, argparse.ArgumentParser]:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return dict(action.choices)
    return {}


def identical_studies() -> Dataset:
    return Dataset.from_records(
        StudyRecord(sid, (0.0, 1.0, 2.0), (80, 50, 20), (40, 70, 90), 100, 100)
        for sid in "ABCDE"
    )


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class TestParser:
    def test_fit_defaults(self):
        args = build_parser().parse_args(["fit", "data.csv"])
        assert args.tool == "fit"
        assert args.method == Method.PSEUDO
        assert args.criterion == Criterion.REML
        assert args.multistart == 5
        assert args.level == 0.95

    def test_sroc_flags(self):
        args = build_parser().parse_args(
            ["sroc", "fit.json", "--grid", "51", "--youden", "--refine", "--svg", "p.svg"]
        )
        assert (args.grid, args.youden, args.refine, args.svg) == (51, True, True, "p.svg")

    def test_simulate_flags(self):
        args = build_parser().parse_args(
            ["simulate", "--seed", "4", "--jobs", "2", "--replicate-log", "r.avro"]
        )
        assert (args.seed, args.jobs, args.replicate_log) == (4, 2, "r.avro")
        assert args.replicates is None

    def test_rejects_unknown_method(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["fit", "data.csv", "--method", "bayes"])

    def test_tool_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_help_lists_every_flag(self):
        subcommands = subparsers(build_parser())
        assert set(subcommands) == {"validate", "fit", "sroc", "simulate"}
        for name, parser in subcommands.items():
            text = parser.format_help()
            for action in parser._actions:
                for option in action.option_strings:
                    assert option in text, f"{name} --help does not mention {option}"

    @pytest.mark.parametrize(
        "tool, flags",
        [
            ("fit", ["--method", "--criterion", "--level", "--output", "--format"]),
            ("sroc", ["--grid", "--youden", "--svg", "--output", "--format"]),
            ("simulate", ["--config", "--seed", "--replicates", "--jobs", "--output"]),
        ],
    )
    def test_required_flags(self, tool, flags):
        options = {
            option
            for action in subparsers(build_parser())[tool]._actions
            for option in action.option_strings
        }
        assert set(flags) <= options

    def test_rejects_unknown_flag(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["fit", "data.csv", "--bogus"])


# ---------------------------------------------------------------------------
# validate / fit / sroc
# ---------------------------------------------------------------------------


class TestFitCommand:
    def test_fit_and_sroc(self, capsys):
        with tempfile.TemporaryDirectory() as tmp:
            data = os.path.join(tmp, "data.csv")
            fit_json = os.path.join(tmp, "fit.json")
            curve = os.path.join(tmp, "curve.csv")
            plot = os.path.join(tmp, "sroc.svg")
            write_csv(heterogeneous_dataset(), data)

            assert main(["validate", data]) == EXIT_OK
            assert main(["fit", data, "-o", fit_json]) == EXIT_OK
            with open(fit_json) as f:
                stored = json.load(f)
            capsys.readouterr()

            code = main(
                ["sroc", fit_json, "-o", curve, "--svg", plot, "--data", data, "--format", "json"]
            )
            report = json.loads(capsys.readouterr().out)
            frame = pd.read_csv(curve)
            root = ET.parse(plot).getroot()

        assert code == EXIT_OK
        assert stored["method"] == "pseudo"
        assert stored["converged"] is True
        assert 0.5 < report["ausc"] < 1.0
        assert "youden" not in report
        assert "summary_point" in report
        assert tuple(frame.columns) == CURVE_COLUMNS
        assert len(frame) == 101
        circles = root.findall(f".//{{{SVG_NS}}}g[@class='studies']/{{{SVG_NS}}}circle")
        assert len(circles) == 40 * 4

    def test_json_mirror_input(self, capsys):
        with tempfile.TemporaryDirectory() as tmp:
            data = os.path.join(tmp, "data.json")
            dump_json(heterogeneous_dataset(), data)
            code = main(["sroc", data, "--youden", "--grid", "21"])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "AUSC:" in out
        assert "x* =" in out

    def test_single_study(self):
        with tempfile.TemporaryDirectory() as tmp:
            data = os.path.join(tmp, "data.csv")
            write_csv(Dataset.from_records(identical_studies().records[:1]), data)
            assert main(["fit", data]) == EXIT_ERROR

    def test_boundary_fit_is_a_failure(self, capsys):
        with tempfile.TemporaryDirectory() as tmp:
            data = os.path.join(tmp, "data.csv")
            write_csv(identical_studies(), data)
            code = main(["fit", data, "--criterion", "ml", "--format", "json"])
        result = json.loads(capsys.readouterr().out)
        assert code == EXIT_FAILURE
        assert result["theta"]["tau1_sq"] < 1e-4

    def test_missing_input(self):
        assert main(["fit", "/nonexistent/data.csv"]) == EXIT_ERROR
        assert main(["sroc", "/nonexistent/fit.json"]) == EXIT_ERROR


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


class TestSimulateCommand:
    CONFIG = {
        "n_studies": 8,
        "m_max": 3,
        "n_min": 100,
        "n_max": 300,
        "replicates": 4,
        "estimators": ["pseudo-ml"],
        "missingness": "mcar",
    }

    def run(self, tmp: str, *extra: str) -> tuple[int, bytes, bytes]:
        config = self.config(tmp)
        tag = "-".join(extra) or "default"
        summary = os.path.join(tmp, f"summary-{tag}.csv")
        log = os.path.join(tmp, f"replicates-{tag}.csv")
        code = main(
            ["simulate", "--config", config, "-o", summary, "--replicate-log", log, *extra]
        )
        with open(summary, "rb") as f, open(log, "rb") as g:
            return code, f.read(), g.read()

    def test_jobs_do_not_change_results(self):
        with tempfile.TemporaryDirectory() as tmp:
            serial = self.run(tmp, "--jobs", "1", "--seed", "3")
            parallel = self.run(tmp, "--jobs", "2", "--seed", "3")
        assert serial[0] == parallel[0] == EXIT_OK
        assert serial[1] == parallel[1]
        assert serial[2] == parallel[2]

    def test_seed_from_environment(self, monkeypatch, capsys):
        monkeypatch.setenv(SEED_ENV, "9")
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "summary.json")
            code = main(["simulate", "--replicates", "1", "-o", out, "--config", self.config(tmp)])
            with open(out) as f:
                data = json.load(f)
        assert code == EXIT_OK
        assert data["config"]["seed"] == 9
        assert data["config"]["replicates"] == 1

    def test_invalid_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = os.path.join(tmp, "config.json")
            with open(config, "w") as f:
                json.dump({"rho": 1.5}, f)
            assert main(["simulate", "--config", config]) == EXIT_ERROR

    def test_invalid_jobs(self):
        with tempfile.TemporaryDirectory() as tmp:
            assert main(["simulate", "--config", self.config(tmp), "--jobs", "0"]) == EXIT_ERROR

    def config(self, tmp: str) -> str:
        path = os.path.join(tmp, "config.json")
        with open(path, "w") as f:
            json.dump(self.CONFIG, f)
        return path
