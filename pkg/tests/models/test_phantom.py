import math

import numpy as np
import pytest
from pydantic import ValidationError

from aettools.models.phantom import EllipseRegion, PhantomSpec


def test_rotated_ellipse():
    region = EllipseRegion(
        name="tilted",
        centre=(0.0, 0.0),
        semi_axes=(0.4, 0.1),
        rotation=math.pi / 2,
        conductivity=1.0,
    )
    inside = region.contains(np.array([[0.0, 0.35], [0.35, 0.0]]))
    np.testing.assert_array_equal(inside, [True, False])
    assert region.outline(16).shape == (16, 2)
    with pytest.raises(ValidationError, match="positive"):
        EllipseRegion(name="flat", centre=(0, 0), semi_axes=(0.1, 0.0), conductivity=1.0)


def test_phantom_spec_validation():
    spec = PhantomSpec(name="empty", domain_semi_axes=(1.0, 0.5), background=0.3)
    np.testing.assert_array_equal(spec.evaluate(np.zeros((3, 2))), 0.3)
    assert spec.conductivities == [0.3]
    with pytest.raises(ValidationError, match="semi-axes"):
        PhantomSpec(name="bad", domain_semi_axes=(1.0, 0.0), background=0.3)
    with pytest.raises(ValidationError):
        PhantomSpec(name="bad", domain_semi_axes=(1.0, 1.0), background=0.0)
