# pylint: disable=redefined-outer-name
"""The built wheel ships the phantoms, the experiments and the `aet` command."""
import subprocess
import sys
import zipfile
from collections.abc import Iterator

import pytest

pytestmark = pytest.mark.slow

PACKAGE_DATA = (
    "aettools/py.typed",
    "aettools/phantoms/data/heart_lung.yml",
    "aettools/phantoms/data/brain.yml",
    "aettools/cli/configs/heart_lung.yml",
    "aettools/cli/configs/brain.yml",
    "aettools/cli/configs/check.yml",
)


@pytest.fixture(scope="module")
def wheel(top_dir, tmp_path_factory) -> Iterator[zipfile.ZipFile]:
    """A wheel built from the working tree."""
    out = tmp_path_factory.mktemp("dist")
    subprocess.run(
        [sys.executable, "-m", "build", "--wheel", "--outdir", str(out), str(top_dir)],
        check=True,
        capture_output=True,
    )
    (path,) = out.glob("aettools-*.whl")
    with zipfile.ZipFile(path) as archive:
        yield archive


@pytest.mark.parametrize("name", PACKAGE_DATA)
def test_wheel_package_data(name, wheel):
    assert name in wheel.namelist()


def test_wheel_leaves_out_tests(wheel):
    assert not [name for name in wheel.namelist() if name.startswith("tests/")]


def test_wheel_entry_point(wheel):
    (name,) = [n for n in wheel.namelist() if n.endswith(".dist-info/entry_points.txt")]
    entry_points = wheel.read(name).decode("utf-8")
    assert "[console_scripts]" in entry_points
    assert "aet = aettools.cli:aet" in entry_points
