import numpy as np

from aettools.exceptions import InvalidFieldError
from aettools.fem.fields import CellField, ScalarField
from aettools.fem.operations import gradient_per_triangle
from aettools.forward.solvers import ForwardSolution

__all__ = ("PowerDensity", "power_density")

PowerDensity = CellField
"""Power densities are per-triangle fields."""


def power_density(sigma: ScalarField, solution: ForwardSolution) -> PowerDensity:
    """`E = σ |∇u|²` on every triangle, with σ averaged over the triangle."""
    if sigma.mesh is not solution.mesh:
        raise InvalidFieldError("σ and the solution live on different meshes.")
    grad = gradient_per_triangle(solution.u)
    return CellField(
        sigma.mesh, sigma.cell_average().values * np.einsum("td,td->t", grad, grad)
    )
