# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import os
import xml.etree.ElementTree as ET
from collections.abc import Sequence

import numpy as np
import pandas as pd

from srocmeta.base import atomic_output
from srocmeta.data.records import LogitStudy

from .curve import SrocPoint
from .regions import SummaryPoint

CURVE_COLUMNS: tuple[str, ...] = ("t", "sroc", "variance", "lower", "upper")

SVG_NS = "http://www.w3.org/2000/svg"
SVG_SIZE: int = 800
SVG_MARGIN: int = 70
TICKS: tuple[float, ...] = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


def curve_frame(points: Sequence[SrocPoint]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "t": [p.t for p in points],
            "sroc": [p.value for p in points],
            "variance": [p.variance for p in points],
            "lower": [p.lower for p in points],
            "upper": [p.upper for p in points],
        },
        columns=list(CURVE_COLUMNS),
    )


def write_curve_csv(points: Sequence[SrocPoint], path: str | os.PathLike[str]) -> None:
    with atomic_output(path) as tmp:
        curve_frame(points).to_csv(tmp, index=False, float_format="%.12g")


def _px(x: float) -> float:
    return SVG_MARGIN + x * (SVG_SIZE - 2 * SVG_MARGIN)


def _py(y: float) -> float:
    return SVG_SIZE - SVG_MARGIN - y * (SVG_SIZE - 2 * SVG_MARGIN)


def _path_points(xs: Sequence[float] | np.ndarray, ys: Sequence[float] | np.ndarray) -> str:
    return " ".join(f"{_px(x):.2f},{_py(y):.2f}" for x, y in zip(xs, ys, strict=True))


def _axes(root: ET.Element) -> None:
    axes = ET.SubElement(root, "g", {"stroke": "#333", "stroke-width": "1", "fill": "none"})
    ET.SubElement(
        axes,
        "rect",
        {
            "x": f"{_px(0):.2f}",
            "y": f"{_py(1):.2f}",
            "width": f"{_px(1) - _px(0):.2f}",
            "height": f"{_py(0) - _py(1):.2f}",
        },
    )
    ET.SubElement(
        axes,
        "line",
        {
            "x1": f"{_px(0):.2f}",
            "y1": f"{_py(0):.2f}",
            "x2": f"{_px(1):.2f}",
            "y2": f"{_py(1):.2f}",
            "stroke": "#bbb",
            "stroke-dasharray": "4 4",
        },
    )
    labels = ET.SubElement(
        root, "g", {"font-family": "sans-serif", "font-size": "14", "fill": "#333"}
    )
    for tick in TICKS:
        ET.SubElement(
            labels,
            "text",
            {"x": f"{_px(tick):.2f}", "y": f"{_py(0) + 22:.2f}", "text-anchor": "middle"},
        ).text = f"{tick:.1f}"
        ET.SubElement(
            labels,
            "text",
            {"x": f"{_px(0) - 10:.2f}", "y": f"{_py(tick) + 5:.2f}", "text-anchor": "end"},
        ).text = f"{tick:.1f}"
    ET.SubElement(
        labels,
        "text",
        {"x": f"{_px(0.5):.2f}", "y": f"{SVG_SIZE - 20}", "text-anchor": "middle"},
    ).text = "1 - Specificity"
    ET.SubElement(
        labels,
        "text",
        {
            "x": "24",
            "y": f"{_py(0.5):.2f}",
            "text-anchor": "middle",
            "transform": f"rotate(-90 24 {_py(0.5):.2f})",
        },
    ).text = "Sensitivity"


def render_svg(
    points: Sequence[SrocPoint],
    studies: Sequence[LogitStudy] = (),
    summary: SummaryPoint | None = None,
) -> ET.ElementTree:
    """
    Draw the curve with its band, the observed study points, and the summary
    point with its confidence (solid) and prediction (dashed) regions.
    """
    root = ET.Element(
        "svg",
        {
            "xmlns": SVG_NS,
            "width": str(SVG_SIZE),
            "height": str(SVG_SIZE),
            "viewBox": f"0 0 {SVG_SIZE} {SVG_SIZE}",
        },
    )
    ET.SubElement(root, "rect", {"width": "100%", "height": "100%", "fill": "white"})
    _axes(root)

    if points:
        ts = [p.t for p in points]
        band = _path_points(
            ts + ts[::-1],
            [p.lower for p in points] + [p.upper for p in points][::-1],
        )
        ET.SubElement(
            root,
            "polygon",
            {"class": "band", "points": band, "fill": "#4a7ab5", "fill-opacity": "0.2"},
        )
        ET.SubElement(
            root,
            "polyline",
            {
                "class": "curve",
                "points": _path_points(ts, [p.value for p in points]),
                "fill": "none",
                "stroke": "#1f4e8c",
                "stroke-width": "2",
            },
        )

    if studies:
        group = ET.SubElement(
            root, "g", {"class": "studies", "fill": "none", "stroke": "#777"}
        )
        for s in studies:
            for se, sp in zip(s.se, s.sp, strict=True):
                ET.SubElement(
                    group,
                    "circle",
                    {"cx": f"{_px(1.0 - sp):.2f}", "cy": f"{_py(se):.2f}", "r": "3"},
                )

    if summary is not None:
        for ellipse, css, dash in (
            (summary.confidence, "confidence", None),
            (summary.prediction, "prediction", "6 4"),
        ):
            outline = ellipse.boundary()
            attrs = {
                "class": css,
                "points": _path_points(outline[:, 0], outline[:, 1]),
                "fill": "none",
                "stroke": "#b5432f",
                "stroke-width": "1.5",
            }
            if dash:
                attrs["stroke-dasharray"] = dash
            ET.SubElement(root, "polyline", attrs)
        ET.SubElement(
            root,
            "circle",
            {
                "class": "summary",
                "cx": f"{_px(1.0 - summary.ssp):.2f}",
                "cy": f"{_py(summary.sse):.2f}",
                "r": "5",
                "fill": "#b5432f",
            },
        )
    return ET.ElementTree(root)


def write_svg(tree: ET.ElementTree, path: str | os.PathLike[str]) -> None:
    with atomic_output(path) as tmp:
        tree.write(tmp, encoding="utf-8", xml_declaration=True)
