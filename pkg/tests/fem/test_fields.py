import numpy as np
import pytest

from aettools.exceptions import InvalidFieldError
from aettools.fem.fields import CellField, ScalarField


def test_scalar_field_values(square_mesh):
    field = ScalarField.from_function(square_mesh, lambda x, y: x + 2 * y)
    assert len(field) == square_mesh.n_vertices
    assert field.min() == pytest.approx(0.0)
    assert field.max() == pytest.approx(3.0)
    with pytest.raises(ValueError):
        field.values[0] = 1.0


def test_from_function_broadcasts_constants(square_mesh):
    field = ScalarField.from_function(square_mesh, lambda x, y: 2.5)
    np.testing.assert_array_equal(field.values, 2.5)


def test_invalid_values(square_mesh):
    with pytest.raises(InvalidFieldError, match="needs"):
        ScalarField(square_mesh, np.zeros(3))
    with pytest.raises(InvalidFieldError, match="non-finite"):
        CellField(square_mesh, np.full(square_mesh.n_triangles, np.nan))


def test_arithmetic(square_mesh):
    a = ScalarField.constant(square_mesh, 2.0)
    b = ScalarField.from_function(square_mesh, lambda x, y: x)
    np.testing.assert_allclose((a + b).values, 2.0 + b.values)
    np.testing.assert_allclose((1 - b).values, 1.0 - b.values)
    np.testing.assert_allclose((a * b).values, 2.0 * b.values)
    np.testing.assert_allclose((-b).values, -b.values)
    np.testing.assert_allclose((3 * a).values, 6.0)


def test_mixing_kinds_and_meshes(square_mesh, disk_mesh):
    nodal = ScalarField.zeros(square_mesh)
    with pytest.raises(InvalidFieldError, match="Cannot combine"):
        nodal + CellField.zeros(square_mesh)
    with pytest.raises(InvalidFieldError, match="different meshes"):
        nodal + ScalarField.zeros(disk_mesh)


def test_cell_average(square_mesh):
    field = ScalarField.from_function(square_mesh, lambda x, y: x)
    average = field.cell_average()
    assert isinstance(average, CellField)
    np.testing.assert_allclose(average.values, square_mesh.centroids[:, 0])


def test_restrict(disk_mesh):
    from aettools.mesh.queries import extract_interior_submesh

    submesh = extract_interior_submesh(disk_mesh, 0.3)
    nodal = ScalarField.from_function(disk_mesh, lambda x, y: x * y)
    cells = nodal.cell_average()
    np.testing.assert_array_equal(
        nodal.restrict(submesh).values, nodal.values[submesh.vertex_map]
    )
    np.testing.assert_array_equal(
        cells.restrict(submesh).values, cells.values[submesh.triangle_map]
    )
    with pytest.raises(InvalidFieldError):
        nodal.restrict(submesh).restrict(submesh)
