#!/usr/bin/env python3

# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import argparse
import logging
import sys
from collections.abc import Sequence

from .base import Tool
from .data import ValidateTool
from .fit import FitTool
from .simulate import SimulateTool
from .sroc import SrocTool

TOOLS: list[Tool] = [
    ValidateTool(),
    FitTool(),
    SrocTool(),
    SimulateTool(),
]


def select_tool(tool_name: str) -> Tool:
    for tool in TOOLS:
        if tool.name() == tool_name:
            return tool
    raise ValueError(f"Tool {tool_name} not found.")


def configure_tools(subparsers: argparse._SubParsersAction) -> None:
    for tool in TOOLS:
        tool.configure(subparsers)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srocmeta",
        description="Summary ROC meta-analysis of studies reporting several thresholds",
    )
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    subparsers = parser.add_subparsers(dest="tool", required=True)
    configure_tools(subparsers)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        format="%(levelname)s:%(message)s",
        level=logging.DEBUG if args.debug else logging.INFO,
    )
    try:
        tool = select_tool(args.tool)
        return tool.run(args)
    except argparse.ArgumentError as e:
        parser.error(e.message)


if __name__ == "__main__":
    sys.exit(main())
