import pytest


@pytest.fixture
def experiment_file(tmp_path):
    """Write a small experiment file and return its path."""

    def write(content: str, name: str = "experiment.yml"):
        path = tmp_path / name
        path.write_text(content, encoding="utf-8")
        return path

    return write
