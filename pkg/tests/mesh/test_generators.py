import math

import numpy as np
import pytest

from aettools.exceptions import MeshError
from aettools.mesh.generators import (
    EllipseBoundary,
    generate_disk_mesh,
    generate_ellipse_mesh,
    generate_mesh,
    generate_rectangle_mesh,
    triangle_count_for,
)
from aettools.mesh.types import DIRICHLET_CODE, GAP_CODE
from aettools.models.electrodes import ElectrodeLayout
from aettools.models.experiment import MeshConfig
from aettools.warnings import TriangleCountApproximate


def test_disk_mesh(disk_mesh):
    disk_mesh.validate_topology()
    assert disk_mesh.electrode_count == 8
    # inscribed polygon: slightly smaller than the disk
    assert disk_mesh.total_area == pytest.approx(math.pi, rel=2e-2)
    assert disk_mesh.total_area < math.pi
    radii = np.linalg.norm(disk_mesh.vertices[disk_mesh.boundary_nodes], axis=1)
    np.testing.assert_allclose(radii, 1.0)


def test_electrodes_cover_requested_fraction(disk_mesh):
    lengths = disk_mesh.boundary_edge_lengths
    labels = disk_mesh.boundary_labels
    covered = lengths[labels > 0].sum() / lengths.sum()
    assert covered == pytest.approx(0.5, rel=1e-2)
    per_electrode = [
        lengths[disk_mesh.electrode_edges(l)].sum() for l in range(1, 9)
    ]
    np.testing.assert_allclose(per_electrode, per_electrode[0], rtol=1e-6)
    assert np.any(labels == GAP_CODE)


def test_electrode_centres_follow_layout(disk_mesh):
    layout = ElectrodeLayout(count=8)
    for l, centre in enumerate(layout.centres, start=1):
        edges = disk_mesh.boundary_edges[disk_mesh.electrode_edges(l)]
        midpoint = disk_mesh.vertices[edges].mean(axis=(0, 1))
        direction = midpoint / np.linalg.norm(midpoint)
        np.testing.assert_allclose(
            direction, [math.cos(centre), math.sin(centre)], atol=1e-6
        )


def test_ellipse_mesh():
    mesh = generate_ellipse_mesh(0.09, 0.08, 0.01, ElectrodeLayout())
    mesh.validate_topology()
    assert mesh.electrode_count == 16
    assert mesh.total_area == pytest.approx(math.pi * 0.09 * 0.08, rel=2e-2)
    x, y = mesh.vertices[mesh.boundary_nodes].T
    np.testing.assert_allclose((x / 0.09) ** 2 + (y / 0.08) ** 2, 1.0, atol=1e-6)


def test_ellipse_arclength():
    circle = EllipseBoundary(2.0, 2.0)
    assert circle.perimeter == pytest.approx(4 * math.pi)
    np.testing.assert_allclose(
        circle.point(np.array([2 * math.pi])), [[-2.0, 0.0]], atol=1e-12
    )
    ellipse = EllipseBoundary(2.0, 1.0)
    # Ramanujan's approximation of the perimeter
    h = (2.0 - 1.0) ** 2 / (2.0 + 1.0) ** 2
    expected = math.pi * 3.0 * (1 + 3 * h / (10 + math.sqrt(4 - 3 * h)))
    assert ellipse.perimeter == pytest.approx(expected, rel=1e-6)


def test_arclength_of_polar_angle():
    ellipse = EllipseBoundary(2.0, 1.0)
    for theta in (0.3, 1.2, 2.5, 4.0, 6.0):
        x, y = ellipse.point(np.array([ellipse.arclength_of_angle(theta)]))[0]
        assert math.atan2(y, x) % (2 * math.pi) == pytest.approx(theta, abs=1e-6)
    assert ellipse.arclength_of_angle(2 * math.pi + 0.3) == pytest.approx(
        ellipse.arclength_of_angle(0.3) + ellipse.perimeter
    )
    circle = EllipseBoundary(2.0, 2.0)
    assert circle.arclength_of_angle(1.0) == pytest.approx(2.0)


def test_ellipse_electrodes_subtend_equal_angles():
    from aettools.mesh.queries import electrode_endpoints

    layout = ElectrodeLayout()
    mesh = generate_ellipse_mesh(0.09, 0.08, 0.01, layout)
    endpoints = electrode_endpoints(mesh)
    angles = np.arctan2(endpoints[:, 1], endpoints[:, 0]) % (2 * math.pi)
    expected = np.array([angle for arc in layout.arcs for angle in arc]) % (2 * math.pi)
    np.testing.assert_allclose(angles, expected, atol=1e-6)


def test_rectangle_mesh(square_mesh):
    square_mesh.validate_topology()
    assert square_mesh.total_area == pytest.approx(1.0)
    assert square_mesh.n_triangles == 200
    assert np.all(square_mesh.boundary_labels == DIRICHLET_CODE)
    assert square_mesh.electrode_count == 0


def test_triangle_count_for():
    h = triangle_count_for(1.0, 200)
    assert h == pytest.approx(0.1)
    with pytest.raises(MeshError):
        triangle_count_for(0.0, 10)


def test_generate_mesh_with_target_count():
    mesh = generate_mesh(
        MeshConfig(shape="disk", radius=0.25, target_triangles=2000),
        ElectrodeLayout(count=16),
    )
    assert 1500 <= mesh.n_triangles <= 2500


def test_generate_mesh_warns_on_count_mismatch():
    with pytest.warns(TriangleCountApproximate):
        generate_mesh(
            MeshConfig(shape="rectangle", size=(1.0, 1.0), target_triangles=3),
            ElectrodeLayout(count=2),
        )


def test_invalid_parameters():
    with pytest.raises(MeshError):
        generate_disk_mesh(-1.0, 0.1, ElectrodeLayout())
    with pytest.raises(MeshError):
        generate_ellipse_mesh(1.0, 0.5, 0.6, ElectrodeLayout())
    with pytest.raises(MeshError):
        generate_rectangle_mesh(1.0, 1.0, 0.0)


def test_triangle_cap(monkeypatch):
    from aettools.config import CONFIG

    monkeypatch.setattr(CONFIG, "max_triangles", 100)
    with pytest.raises(MeshError, match="cap"):
        generate_disk_mesh(1.0, 0.05, ElectrodeLayout())
