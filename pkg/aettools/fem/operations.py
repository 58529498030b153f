from typing import Union

import numpy as np

from aettools.exceptions import InvalidFieldError
from aettools.fem.assembly import assemble_cell_load
from aettools.fem.fields import CellField, ScalarField
from aettools.fem.solvers import mass_matrix, mass_solve

__all__ = (
    "gradient_per_triangle",
    "l2_inner",
    "l2_norm",
    "cell_to_node_projection",
)


def gradient_per_triangle(field: ScalarField) -> np.ndarray:
    """`(T, 2)` constant gradient of a P1 field on every triangle."""
    mesh = field.mesh
    return np.einsum("tid,ti->td", mesh.gradients, field.values[mesh.triangles])


def l2_inner(
    a: Union[ScalarField, CellField], b: Union[ScalarField, CellField]
) -> float:
    """Exact `∫ a b` for nodal (P1) and per-triangle (P0) fields in any
    combination."""
    if a.mesh is not b.mesh:
        raise InvalidFieldError("Fields live on different meshes.")
    mesh = a.mesh
    if isinstance(a, ScalarField) and isinstance(b, ScalarField):
        return float(a.values @ (mass_matrix(mesh) @ b.values))
    if isinstance(a, CellField) and isinstance(b, CellField):
        return float(np.sum(mesh.areas * a.values * b.values))
    nodal, cell = (a, b) if isinstance(a, ScalarField) else (b, a)
    return float(np.sum(mesh.areas * cell.values * nodal.cell_average().values))


def l2_norm(a: Union[ScalarField, CellField]) -> float:
    return float(np.sqrt(max(l2_inner(a, a), 0.0)))


def cell_to_node_projection(field: CellField) -> ScalarField:
    """L² projection of a per-triangle field onto the P1 space."""
    load = assemble_cell_load(field.mesh, field.values)
    return ScalarField(field.mesh, mass_solve(field.mesh, load))
