import numpy as np
import pytest
from pydantic import ValidationError

from aettools.exceptions import ConfigurationError
from aettools.forward.patterns import fourier_pattern, fourier_patterns
from aettools.models.patterns import CurrentPattern


def test_fourier_pattern():
    pattern = fourier_pattern(2, 16)
    assert pattern.label == "I^(2)"
    assert pattern.count == 16
    currents = pattern.as_array()
    assert abs(currents.sum()) < 1e-15
    l = np.arange(1, 17)
    np.testing.assert_allclose(currents, np.cos(2 * np.pi * 2 * l / 16), atol=1e-15)


@pytest.mark.parametrize("n", [0, 16, -1, 20])
def test_invalid_pattern_index(n):
    with pytest.raises(ConfigurationError, match="invalid"):
        fourier_pattern(n, 16)


def test_too_few_electrodes():
    with pytest.raises(ConfigurationError, match="at least 2"):
        fourier_pattern(1, 1)


def test_fourier_patterns():
    labels = [pattern.label for pattern in fourier_patterns([1, 2, 3], 8)]
    assert labels == ["I^(1)", "I^(2)", "I^(3)"]


def test_charge_conservation_is_enforced():
    with pytest.raises(ValidationError, match="charge conservation"):
        CurrentPattern(currents=(1.0, 0.5))
    with pytest.raises(ValidationError, match="finite"):
        CurrentPattern(currents=(float("inf"), 0.0))
    assert CurrentPattern(currents=(1.0, -1.0)).count == 2
