import math

import numpy as np
import pytest
from pydantic import ValidationError

from aettools.exceptions import InvalidFieldError
from aettools.fem.fields import CellField
from aettools.models.noise import NoiseSpec
from aettools.phantoms.noise import add_noise, realized_snr


@pytest.fixture
def power(disk_mesh):
    return CellField(disk_mesh, 1.0 + disk_mesh.centroids[:, 0] ** 2)


def test_noise_free_returns_input(power):
    spec = NoiseSpec(snr_db=math.inf)
    assert spec.noise_free
    assert add_noise(power, spec) is power
    assert realized_snr(power, power) == math.inf


@pytest.mark.parametrize("snr_db", [20.0, 60.0, 100.0])
def test_realized_snr_is_exact(power, snr_db):
    noisy = add_noise(power, NoiseSpec(snr_db=snr_db, seed=3))
    assert realized_snr(power, noisy) == pytest.approx(snr_db, abs=1e-8)


def test_noise_is_reproducible(power):
    spec = NoiseSpec(snr_db=40.0, seed=11)
    first = add_noise(power, spec)
    np.testing.assert_array_equal(first.values, add_noise(power, spec).values)
    other = add_noise(power, spec.for_pattern(1))
    assert not np.allclose(first.values, other.values)


def test_zero_field_rejects_noise(disk_mesh):
    with pytest.raises(InvalidFieldError, match="zero field"):
        add_noise(CellField.zeros(disk_mesh), NoiseSpec(snr_db=60.0))


def test_noise_spec():
    spec = NoiseSpec(seed=5)
    assert spec.snr_db == 60.0
    assert spec.for_pattern(3).seed == 8
    assert spec.seed == 5
    for bad in (float("nan"), -math.inf):
        with pytest.raises(ValidationError, match="finite number"):
            NoiseSpec(snr_db=bad)
    with pytest.raises(ValidationError):
        NoiseSpec(seed=-1)
