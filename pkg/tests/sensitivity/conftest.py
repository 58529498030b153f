import numpy as np
import pytest


@pytest.fixture(scope="session")
def scem_states(disk_mesh, smooth_sigma):
    """Linearizations of two Fourier patterns under the smoothened model."""
    from aettools.forward.patterns import fourier_patterns
    from aettools.forward.solvers import ElectrodeSystem
    from aettools.models.electrodes import ScemModel
    from aettools.sensitivity.state import linearize

    system = ElectrodeSystem(disk_mesh, smooth_sigma, ScemModel(peak=1.0))
    solutions = [system.solve(pattern) for pattern in fourier_patterns([1, 2], 8)]
    return linearize(system, solutions)


@pytest.fixture(scope="session")
def dcm_state(square_mesh):
    """Linearization of the continuum model on the unit square."""
    from aettools.fem.fields import ScalarField
    from aettools.forward.solvers import DirichletSystem
    from aettools.sensitivity.state import linearize

    sigma = ScalarField.from_function(square_mesh, lambda x, y: 1.0 + x * y)
    system = DirichletSystem(square_mesh, sigma)
    solution = system.solve(lambda x, y: x + 0.3 * np.sin(np.pi * y))
    return linearize(system, [solution])[0]
