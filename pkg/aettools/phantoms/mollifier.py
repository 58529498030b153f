import warnings
from typing import TYPE_CHECKING, Union

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from aettools.exceptions import InvalidFieldError
from aettools.fem.fields import CellField, ScalarField
from aettools.logger import LOGGER
from aettools.mesh.queries import subcell_points
from aettools.warnings import MollifierBelowResolution

if TYPE_CHECKING:  # pragma: no cover
    from aettools.mesh.types import Mesh

__all__ = ("bump_kernel", "cells_to_nodes", "mollify")


def bump_kernel(distance: np.ndarray, epsilon: float) -> np.ndarray:
    """Unnormalized bump `exp(ε² / (r² − ε²))`, zero for `r ≥ ε`."""
    distance = np.asarray(distance, dtype=float)
    values = np.zeros_like(distance)
    inside = distance < epsilon
    values[inside] = np.exp(epsilon**2 / (distance[inside] ** 2 - epsilon**2))
    return values


def cells_to_nodes(field: CellField) -> ScalarField:
    """Area-weighted mean of the triangles around every vertex."""
    mesh = field.mesh
    weights = np.repeat(mesh.areas, 3)
    nodes = mesh.triangles.ravel()
    total = np.bincount(nodes, weights=weights, minlength=mesh.n_vertices)
    values = np.bincount(
        nodes, weights=weights * np.repeat(field.values, 3), minlength=mesh.n_vertices
    )
    return ScalarField(mesh, values / total)


def mollify(field: Union[ScalarField, CellField], epsilon: float) -> ScalarField:
    """Convolve a piecewise-constant field with the normalized bump of radius
    `epsilon` and evaluate the result at the mesh vertices.

    The convolution is computed by quadrature over the triangles within
    `epsilon` of each vertex, with four points per triangle, and normalized
    by the discrete kernel mass. The result is therefore a convex combination
    of the input values and stays within their range.

    Nodal input is treated as piecewise constant through its triangle averages.

    Parameters:
        field: The field to smooth.
        epsilon: Mollification radius in metres.

    Returns:
        The smoothed nodal field. When `epsilon` is below half the mesh
        size a `MollifierBelowResolution` warning is emitted and the input is
        returned as a nodal field unchanged.

    Raises:
        InvalidFieldError: If `epsilon` is not positive.

    """
    if not epsilon > 0:
        raise InvalidFieldError(f"Mollification radius must be positive, got {epsilon}.")
    mesh = field.mesh
    if isinstance(field, ScalarField):
        passthrough = field
        cells = field.cell_average().values
    else:
        passthrough = cells_to_nodes(field)
        cells = np.asarray(field.values)

    if epsilon < 0.5 * mesh.characteristic_h:
        warnings.warn(
            MollifierBelowResolution(
                f"Mollification radius {epsilon:.2e} m is below the mesh resolution "
                f"{mesh.characteristic_h:.2e} m; the field is not smoothed."
            )
        )
        return passthrough

    subcells = subcell_points(mesh)
    per_cell = subcells.shape[1]
    points = subcells.reshape(-1, 2)
    point_values = np.repeat(cells, per_cell)
    point_weights = np.repeat(mesh.areas / per_cell, per_cell)

    pairs = cKDTree(mesh.vertices).sparse_distance_matrix(
        cKDTree(points), epsilon, output_type="ndarray"
    )
    kernel = bump_kernel(pairs["v"], epsilon) * point_weights[pairs["j"]]
    weights = sp.csr_matrix(
        (kernel, (pairs["i"], pairs["j"])), shape=(mesh.n_vertices, len(points))
    )
    mass = np.asarray(weights.sum(axis=1)).ravel()
    smoothed = passthrough.values.copy()
    covered = mass > 0
    smoothed[covered] = (weights @ point_values)[covered] / mass[covered]
    if not np.all(covered):
        LOGGER.debug(
            "%d vertices have no quadrature point within ε; kept their values.",
            int((~covered).sum()),
        )
    return ScalarField(mesh, smoothed)
