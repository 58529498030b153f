"""The `aettools` logger: rich console output plus an optional rotating log file.

Every module logs through [`LOGGER`][aettools.logger.LOGGER]. The console
level follows `CONFIG.log_level` (or `DEBUG` when `CONFIG.debug` is set) and
can be lowered from the command line with
[`set_verbosity`][aettools.logger.set_verbosity]. File logging is enabled
only when `CONFIG.log_dir` is writable.
"""

import logging
import logging.handlers
import os
from pathlib import Path
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

__all__ = ("LOGGER", "CONSOLE_HANDLER", "FILE_HANDLER", "LOG_FILE_NAME", "set_verbosity")

LOG_FILE_NAME = "aettools.log"
_MAX_BYTES = 1_000_000
_BACKUPS = 5

LOGGER = logging.getLogger("aettools")
LOGGER.setLevel(logging.DEBUG)

CONSOLE_HANDLER = RichHandler(
    console=Console(stderr=True), show_path=False, rich_tracebacks=True
)
CONSOLE_HANDLER.setFormatter(logging.Formatter("[%(name)s] %(message)s"))


def _configured_level_and_dir() -> tuple[str, Path]:
    try:
        from aettools.config import CONFIG
    except ImportError:
        return (
            os.getenv("AET_LOG_LEVEL", "INFO").upper(),
            Path(os.getenv("AET_LOG_DIR", "/var/log/aettools/")).resolve(),
        )
    level = "DEBUG" if CONFIG.debug else CONFIG.log_level.value.upper()
    return level, CONFIG.log_dir


def _file_handler(directory: Path) -> Optional[logging.Handler]:
    """A rotating DEBUG-level handler in `directory`, or `None` if the
    directory cannot be written to."""
    try:
        directory.mkdir(exist_ok=True)
        handler = logging.handlers.RotatingFileHandler(
            directory.joinpath(LOG_FILE_NAME), maxBytes=_MAX_BYTES, backupCount=_BACKUPS
        )
    except OSError:
        LOGGER.debug(
            "Log files are not saved: %s cannot be written to. Set AET_LOG_DIR "
            "to a folder you have write permissions for.",
            directory,
        )
        return None
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(
        logging.Formatter(
            "[%(levelname)-8s %(asctime)s %(filename)s:%(lineno)d][%(name)s] %(message)s",
            "%d-%m-%Y %H:%M:%S",
        )
    )
    return handler


def set_verbosity(verbosity: int) -> None:
    """Lower the console level to `INFO` for 1 and `DEBUG` for 2 or more;
    0 keeps the configured level."""
    if verbosity == 1:
        CONSOLE_HANDLER.setLevel(logging.INFO)
    elif verbosity > 1:
        CONSOLE_HANDLER.setLevel(logging.DEBUG)


_LEVEL, _LOG_DIR = _configured_level_and_dir()
CONSOLE_HANDLER.setLevel(_LEVEL)
LOGGER.addHandler(CONSOLE_HANDLER)

FILE_HANDLER = _file_handler(_LOG_DIR)
if FILE_HANDLER is not None:
    LOGGER.addHandler(FILE_HANDLER)
