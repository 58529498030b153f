import os
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pytest

if TYPE_CHECKING:
    from aettools.fem.fields import ScalarField
    from aettools.mesh.types import Mesh


def pytest_addoption(parser):
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="Run the end-to-end reconstruction experiments.",
    )


def pytest_configure(config):
    """Method that runs before pytest collects tests so no modules are imported"""
    cwd = Path(__file__).parent
    os.environ["AET_CONFIG_FILE"] = str(cwd / "test_config.yml")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def top_dir() -> Path:
    """Return Path instance for the repository's top (root) directory"""
    return Path(__file__).parent.parent.resolve()


@pytest.fixture(scope="session")
def disk_mesh() -> "Mesh":
    """Unit disk with 8 electrodes covering half of the boundary."""
    from aettools.mesh.generators import generate_disk_mesh
    from aettools.models.electrodes import ElectrodeLayout

    return generate_disk_mesh(1.0, 0.2, ElectrodeLayout(count=8))


@pytest.fixture(scope="session")
def square_mesh() -> "Mesh":
    """Unit square with Dirichlet labels on the whole boundary."""
    from aettools.mesh.generators import generate_rectangle_mesh

    return generate_rectangle_mesh(1.0, 1.0, 0.1)


@pytest.fixture(scope="session")
def smooth_sigma(disk_mesh) -> "ScalarField":
    """Smooth conductivity between 1 and 1.5 on the unit disk."""
    from aettools.fem.fields import ScalarField

    return ScalarField.from_function(
        disk_mesh, lambda x, y: 1.0 + 0.5 * np.exp(-4.0 * ((x - 0.2) ** 2 + y**2))
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def thorax_mesh() -> "Mesh":
    """Thorax-sized disk (radius 0.25 m) with 16 electrodes."""
    from aettools.mesh.generators import generate_disk_mesh
    from aettools.models.electrodes import ElectrodeLayout

    return generate_disk_mesh(0.25, 0.015, ElectrodeLayout(count=16))
