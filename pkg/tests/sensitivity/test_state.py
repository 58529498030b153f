import numpy as np
import pytest

from aettools.exceptions import StaleLinearizationError
from aettools.fem.fields import ScalarField
from aettools.forward.power import power_density
from aettools.forward.solvers import ElectrodeSystem
from aettools.models.electrodes import ScemModel
from aettools.sensitivity.state import (
    LinearizationState,
    frozen_boundary_system,
    linearize,
)


def test_states_share_the_factorization(scem_states, smooth_sigma):
    first, second = scem_states
    assert first.system is second.system
    assert first.sigma is smooth_sigma
    assert first.uses_electrodes
    np.testing.assert_allclose(
        first.power_density().values,
        power_density(smooth_sigma, first.solution).values,
    )


def test_check_current(scem_states, smooth_sigma):
    state = scem_states[0]
    state.check_current(smooth_sigma)
    state.check_current(ScalarField(smooth_sigma.mesh, smooth_sigma.values.copy()))
    with pytest.raises(StaleLinearizationError):
        state.check_current(1.01 * smooth_sigma)


def test_mismatched_system(disk_mesh, scem_states, smooth_sigma):
    other = ElectrodeSystem(disk_mesh, 2.0 * smooth_sigma, ScemModel())
    with pytest.raises(StaleLinearizationError, match="different conductivity"):
        LinearizationState(smooth_sigma, scem_states[0].solution, other)
    with pytest.raises(StaleLinearizationError, match="different conductivities"):
        linearize(scem_states[0].system, [scem_states[0].solution], other)


def test_frozen_boundary_system(scem_states, disk_mesh):
    system = frozen_boundary_system(scem_states[0].system)
    np.testing.assert_array_equal(system.fixed, disk_mesh.boundary_nodes)
    states = linearize(scem_states[0].system, [scem_states[0].solution], system)
    assert not states[0].uses_electrodes
