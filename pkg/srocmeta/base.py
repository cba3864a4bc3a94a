# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import argparse
import os
import tempfile
from collections.abc import Generator
from contextlib import contextmanager
from pathlib import Path
from typing import Protocol

AVRO_CODEC = os.environ.get("AVRO_CODEC", "deflate")
SEED_ENV = "SROCMETA_SEED"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILURE = 2


class Tool(Protocol):
    def name(self) -> str: ...
    def configure(self, subparsers: argparse._SubParsersAction) -> None: ...
    def run(self, args: argparse.Namespace) -> int: ...


def current_umask() -> int:
    # The umask can only be read by setting it.
    mask = os.umask(0)
    os.umask(mask)
    return mask


@contextmanager
def atomic_output(path: str | os.PathLike[str]) -> Generator[str, None, None]:
    """
    Yield a temporary path next to `path` and move it into place on success.

    Interrupted or failed writes leave the destination untouched. The artifact
    gets the mode a plain open() would give it, 0o666 under the process umask.

    :param path: Final destination of the artifact.
    :return: A generator yielding the temporary path to write to.
    """
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    if not directory.is_dir():
        raise FileNotFoundError(f"Output directory does not exist: {directory}")
    fd, tmp = tempfile.mkstemp(
        prefix=f".{target.name}.", suffix=".tmp", dir=str(directory)
    )
    os.close(fd)
    try:
        yield tmp
        os.chmod(tmp, 0o666 & ~current_umask())
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
