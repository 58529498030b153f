import math

import numpy as np
import pytest

from aettools.exceptions import InvalidFieldError
from aettools.fem.fields import CellField, ScalarField
from aettools.forward.patterns import fourier_patterns
from aettools.mesh.queries import extract_interior_submesh
from aettools.models.electrodes import ScemModel
from aettools.models.noise import NoiseSpec
from aettools.phantoms.noise import add_noise, realized_snr
from aettools.reconstruction.measurements import (
    Measurement,
    boundary_voltage_error,
    extract_boundary_trace,
    simulate_dcm_measurements,
    simulate_measurements,
)


def test_noise_free_measurements(clean_measurements):
    assert [m.label for m in clean_measurements] == ["I^(1)", "I^(2)", "I^(3)"]
    for m in clean_measurements:
        assert abs(m.U_true.sum()) < 1e-12
        assert m.E_delta.min() >= 0
        assert m.trace is None


def test_noisy_measurements(disk_mesh, smooth_sigma):
    measurements, clean = simulate_measurements(
        disk_mesh,
        smooth_sigma,
        ScemModel(),
        fourier_patterns([1, 2], 8),
        NoiseSpec(snr_db=30.0, seed=4),
    )
    for m, power in zip(measurements, clean):
        assert realized_snr(power, m.E_delta) == pytest.approx(30.0, abs=1e-8)
    noise = [m.E_delta - power for m, power in zip(measurements, clean)]
    draws = [n.values / np.linalg.norm(n.values) for n in noise]
    assert abs(draws[0] @ draws[1]) < 0.5


def test_measurements_on_another_mesh(disk_mesh):
    from aettools.mesh.generators import generate_disk_mesh
    from aettools.models.electrodes import ElectrodeLayout

    fine = generate_disk_mesh(1.0, 0.1, ElectrodeLayout(count=8))
    sigma = ScalarField(fine, 1.0 + 0.3 * fine.vertices[:, 0] ** 2)
    patterns = fourier_patterns([1], 8)
    measurements, clean = simulate_measurements(
        fine,
        sigma,
        ScemModel(),
        patterns,
        NoiseSpec(snr_db=40.0, seed=1),
        target=disk_mesh,
    )
    assert measurements[0].mesh is disk_mesh
    assert clean[0].mesh is disk_mesh
    snr = realized_snr(clean[0], measurements[0].E_delta)
    assert snr == pytest.approx(40.0, abs=1e-8)

    same, _ = simulate_measurements(
        fine, sigma, ScemModel(), patterns, NoiseSpec(snr_db=math.inf)
    )
    assert same[0].mesh is fine
    np.testing.assert_allclose(measurements[0].U_true, same[0].U_true)
    # total power, up to the cells cut by the coarse boundary
    total = float(clean[0].values @ disk_mesh.areas)
    assert total == pytest.approx(float(same[0].E_delta.values @ fine.areas), rel=0.1)


def test_dcm_measurements_use_offset_streams(square_mesh):
    from aettools.forward.power import power_density
    from aettools.forward.solvers import BoundaryTrace, DirichletSystem

    sigma = ScalarField.constant(square_mesh, 1.0)
    nodes = square_mesh.dirichlet_nodes
    trace = BoundaryTrace(square_mesh, nodes, square_mesh.vertices[nodes, 0])
    noise = NoiseSpec(snr_db=40.0, seed=1)
    [measurement] = simulate_dcm_measurements(sigma, [trace], noise, stream_offset=2)

    power = power_density(sigma, DirichletSystem(square_mesh, sigma).solve(trace))
    expected = add_noise(power, noise.for_pattern(2))
    np.testing.assert_array_equal(measurement.E_delta.values, expected.values)
    assert measurement.label == "trace"


def test_measurement_needs_one_source(disk_mesh):
    E = CellField.zeros(disk_mesh)
    with pytest.raises(InvalidFieldError, match="exactly one"):
        Measurement(E)


def test_boundary_voltage_error():
    U = np.array([1.0, -2.0, 1.0])
    assert boundary_voltage_error(U, U) == 0.0
    assert boundary_voltage_error(U, 1.1 * U) == pytest.approx(0.1)
    with pytest.raises(InvalidFieldError, match="shape"):
        boundary_voltage_error(U, U[:2])
    with pytest.raises(InvalidFieldError, match="zero"):
        boundary_voltage_error(np.zeros(3), U)


def test_extract_boundary_trace(disk_mesh, smooth_sigma, square_mesh):
    submesh = extract_interior_submesh(disk_mesh, 0.3)
    trace = extract_boundary_trace(smooth_sigma, submesh)
    assert trace.mesh is submesh.mesh
    np.testing.assert_array_equal(
        trace.values, smooth_sigma.values[submesh.vertex_map[trace.nodes]]
    )
    with pytest.raises(InvalidFieldError, match="parent"):
        extract_boundary_trace(ScalarField.zeros(square_mesh), submesh)


def test_noise_free_spec_is_infinite():
    assert NoiseSpec(snr_db=math.inf).noise_free
