import logging


def test_single_package_logger():
    """Every module logs through the same `aettools` logger."""
    from aettools.logger import CONSOLE_HANDLER, LOGGER

    assert LOGGER.name == "aettools"
    assert CONSOLE_HANDLER in LOGGER.handlers
    assert logging.getLogger("aettools") is LOGGER


def test_configured_console_level():
    """The console level follows `log_level` of the test configuration."""
    from aettools.config import CONFIG
    from aettools.logger import CONSOLE_HANDLER

    assert CONFIG.log_level.value == "warning"
    assert CONSOLE_HANDLER.level == logging.WARNING


def test_set_verbosity():
    from aettools.logger import CONSOLE_HANDLER, set_verbosity

    original = CONSOLE_HANDLER.level
    try:
        set_verbosity(0)
        assert CONSOLE_HANDLER.level == original
        set_verbosity(1)
        assert CONSOLE_HANDLER.level == logging.INFO
        set_verbosity(3)
        assert CONSOLE_HANDLER.level == logging.DEBUG
    finally:
        CONSOLE_HANDLER.setLevel(original)


def test_unwritable_log_dir(tmp_path):
    from aettools.logger import _file_handler

    blocker = tmp_path / "file"
    blocker.write_text("", encoding="utf-8")
    assert _file_handler(blocker / "logs") is None

    handler = _file_handler(tmp_path / "logs")
    try:
        assert handler is not None
        assert handler.level == logging.DEBUG
        assert (tmp_path / "logs" / "aettools.log").exists()
    finally:
        handler.close()
