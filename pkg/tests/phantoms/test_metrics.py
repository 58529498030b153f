import pytest

from aettools.exceptions import InvalidFieldError
from aettools.fem.fields import ScalarField
from aettools.phantoms.metrics import relative_error


def test_relative_error(smooth_sigma):
    assert relative_error(smooth_sigma, smooth_sigma) == 0.0
    assert relative_error(smooth_sigma, 0 * smooth_sigma) == pytest.approx(1.0)
    assert relative_error(smooth_sigma, 1.1 * smooth_sigma) == pytest.approx(0.1)


def test_relative_error_of_zero_reference(disk_mesh, smooth_sigma):
    with pytest.raises(InvalidFieldError, match="zero norm"):
        relative_error(ScalarField.zeros(disk_mesh), smooth_sigma)
