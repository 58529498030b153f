# pylint: disable=protected-access
import os
from pathlib import Path

import pytest


def test_env_variable() -> None:
    """Set AET_DEBUG environment variable and check the settings pick it up"""
    from aettools.config import AetSettings

    org_env_var = os.getenv("AET_DEBUG")

    try:
        os.environ["AET_DEBUG"] = "true"
        settings = AetSettings()
        assert settings.debug

        os.environ.pop("AET_DEBUG", None)
        settings = AetSettings()
        assert not settings.debug
    finally:
        if org_env_var is not None:
            os.environ["AET_DEBUG"] = org_env_var
        else:
            assert os.getenv("AET_DEBUG") is None


def test_test_config_is_loaded(top_dir: Path) -> None:
    """The test suite runs with tests/test_config.yml"""
    from aettools.config import CONFIG, LogLevel

    assert Path(os.environ["AET_CONFIG_FILE"]) == top_dir / "tests" / "test_config.yml"
    assert CONFIG.log_level == LogLevel.WARNING
    assert CONFIG.threads == 1
    assert CONFIG.max_triangles == 200_000


def test_yaml_and_json_config_files(tmp_path: Path, monkeypatch) -> None:
    from aettools.config import AetSettings

    yaml_file = tmp_path / "config.yml"
    yaml_file.write_text("threads: 3\nlog_level: DEBUG\n")
    monkeypatch.setenv("AET_CONFIG_FILE", str(yaml_file))
    settings = AetSettings()
    assert settings.threads == 3
    assert settings.log_level.value == "debug"

    json_file = tmp_path / "config.json"
    json_file.write_text('{"solver_tol": 1e-12}')
    monkeypatch.setenv("AET_CONFIG_FILE", str(json_file))
    assert AetSettings().solver_tol == 1e-12


def test_environment_wins_over_file(tmp_path: Path, monkeypatch) -> None:
    from aettools.config import AetSettings

    config_file = tmp_path / "config.yml"
    config_file.write_text("threads: 3\n")
    monkeypatch.setenv("AET_CONFIG_FILE", str(config_file))
    monkeypatch.setenv("AET_THREADS", "5")
    assert AetSettings().threads == 5


@pytest.mark.parametrize(
    "content, match",
    [
        ("threads: [1\n", "Unable to parse"),
        ("", "Unable to load any settings"),
        ("- 1\n- 2\n", "as a dictionary"),
    ],
    ids=["bad-yaml", "empty", "not-a-dict"],
)
def test_unusable_config_files(tmp_path: Path, monkeypatch, content, match) -> None:
    """Unusable files fall back to the defaults with a warning"""
    from aettools.config import AetSettings

    config_file = tmp_path / "config.yml"
    config_file.write_text(content)
    monkeypatch.setenv("AET_CONFIG_FILE", str(config_file))
    with pytest.warns(UserWarning, match=match):
        settings = AetSettings()
    assert settings.threads == 1


def test_missing_config_file(tmp_path: Path, monkeypatch) -> None:
    from aettools.config import AetSettings

    monkeypatch.setenv("AET_CONFIG_FILE", str(tmp_path / "nope.yml"))
    with pytest.warns(UserWarning, match="Unable to find config file"):
        AetSettings()
