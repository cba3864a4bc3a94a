# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import os
import tempfile
import xml.etree.ElementTree as ET

import numpy as np
import pandas as pd
import pytest

from srocmeta.data.records import Dataset, StudyRecord
from srocmeta.fit.estimate import boundary_flags
from srocmeta.fit.result import FitResult
from srocmeta.model.likelihood import Criterion, Method, Theta
from srocmeta.sroc.curve import curve_grid, sroc_points
from srocmeta.sroc.regions import summary_point
from srocmeta.sroc.render import CURVE_COLUMNS, SVG_NS, render_svg, write_curve_csv, write_svg

# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

THETA = Theta(2.0, 1.0, -2.0, 1.5, 0.1, 0.1, 0.6)


def points(size: int = 101):
    return sroc_points(THETA.beta, np.eye(4) * 0.01, curve_grid(size))


def classes(tree: ET.ElementTree) -> list[str]:
    return [el.get("class") for el in tree.getroot().iter() if el.get("class")]


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


class TestWriteCurveCsv:
    def test_rows_and_columns(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "curve.csv")
            write_curve_csv(points(), path)
            frame = pd.read_csv(path)
        assert tuple(frame.columns) == CURVE_COLUMNS
        assert len(frame) == 101
        assert frame["t"].is_monotonic_increasing
        assert (frame["lower"] <= frame["sroc"]).all()
        assert (frame["sroc"] <= frame["upper"]).all()

    def test_missing_directory(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "nope", "curve.csv")
            with pytest.raises(FileNotFoundError):
                write_curve_csv(points(), path)
            assert not os.path.exists(path)


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------


class TestRenderSvg:
    def test_curve_only(self):
        tree = render_svg(points())
        root = tree.getroot()
        assert root.get("viewBox") == "0 0 800 800"
        assert classes(tree) == ["band", "curve"]

    def test_full_plot_is_well_formed(self):
        rec = StudyRecord("A", (0.0, 1.0), (40, 20), (25, 40), 50, 50)
        dataset = Dataset.from_records([rec])
        result = FitResult(
            theta=THETA,
            cov=np.eye(7) * 0.01,
            objective=0.0,
            converged=True,
            boundary_flags=boundary_flags(THETA, 1e-4),
            method=Method.PSEUDO,
            criterion=Criterion.REML,
        )
        tree = render_svg(points(), dataset.studies, summary_point(0.5, result))
        assert classes(tree) == ["band", "curve", "studies", "confidence", "prediction", "summary"]
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "sroc.svg")
            write_svg(tree, path)
            parsed = ET.parse(path).getroot()
        assert parsed.tag == f"{{{SVG_NS}}}svg"
        circles = parsed.findall(f".//{{{SVG_NS}}}g[@class='studies']/{{{SVG_NS}}}circle")
        assert len(circles) == 2
