import math

import numpy as np
import pytest

from aettools.forward.electrodes import (
    BumpProfile,
    ConstantProfile,
    conductance_profiles,
    electrode_conductance_profile,
    electrode_lengths,
)
from aettools.models.electrodes import CemModel, ScemModel


def test_bump_profile():
    bump = electrode_conductance_profile(0.2, 3.0)
    assert bump == BumpProfile(half_length=0.1, peak=3.0)
    x = np.array([-0.2, -0.1, 0.0, 0.05, 0.1, 0.3])
    values = bump(x)
    assert values[2] == pytest.approx(3.0)
    assert values[3] == pytest.approx(3.0 * math.exp(0.01 / (0.0025 - 0.01) + 1.0))
    np.testing.assert_array_equal(values[[0, 1, 4, 5]], 0.0)
    assert np.all(values >= 0)


@pytest.mark.parametrize("l_e, peak", [(0.0, 1.0), (0.1, 0.0), (-0.1, 1.0)])
def test_invalid_bump(l_e, peak):
    with pytest.raises(ValueError, match="positive"):
        electrode_conductance_profile(l_e, peak)


def test_constant_profile():
    np.testing.assert_array_equal(ConstantProfile(0.5)(np.zeros((2, 3))), 0.5)


def test_electrode_lengths(disk_mesh):
    lengths = electrode_lengths(disk_mesh)
    assert len(lengths) == 8
    perimeter = disk_mesh.boundary_edge_lengths.sum()
    assert lengths.sum() == pytest.approx(0.5 * perimeter, rel=1e-2)


def test_conductance_profiles(disk_mesh):
    bumps = conductance_profiles(disk_mesh, ScemModel(peak=2.0))
    lengths = electrode_lengths(disk_mesh)
    assert [bump.half_length for bump in bumps] == pytest.approx(0.5 * lengths)
    assert all(bump.peak == 2.0 for bump in bumps)

    constants = conductance_profiles(disk_mesh, CemModel(impedance=4.0))
    assert constants == [ConstantProfile(0.25)] * 8

    shared = ConstantProfile(1.0)
    assert conductance_profiles(disk_mesh, shared) == [shared] * 8
