"""The Gram operator `R = I + β²Δ²` of the scaled H² inner product.

P1 elements are not H²-conforming, so `R` is discretized in mixed form with
an auxiliary field `χ ≈ Δτ` satisfying `∫ χ w = −∫ ∇τ·∇w` for all `w`,
both with natural Neumann conditions. Eliminating `χ` gives the weak operator

    G = M + β² K M⁻¹ K,

with `M` the mass and `K` the Laplacian stiffness matrix, so that
`⟨Rτ, w⟩ = τᵀ G w`.
"""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse as sp

from aettools.exceptions import ConfigurationError, InvalidFieldError
from aettools.fem.assembly import assemble_mass, assemble_stiffness
from aettools.fem.fields import ScalarField
from aettools.fem.solvers import Factorization, mass_factorization
from aettools.logger import LOGGER

if TYPE_CHECKING:  # pragma: no cover
    from aettools.mesh.types import Mesh

__all__ = ("GramOperator", "gram_assemble", "gram_apply", "gram_solve")


@dataclass(frozen=True, eq=False)
class GramOperator:
    """Assembled mixed-form blocks of `I + β²Δ²` on a mesh.

    Attributes:
        mesh: The mesh the operator acts on.
        beta: Scaling of the H² seminorm.
        mass: Consistent mass matrix `M`.
        stiffness: Neumann Laplacian stiffness matrix `K`.

    """

    mesh: "Mesh"
    beta: float
    mass: sp.csr_matrix
    stiffness: sp.csr_matrix
    _mixed: Factorization = field(repr=False)

    def _values(self, tau: ScalarField) -> np.ndarray:
        if tau.mesh is not self.mesh:
            raise InvalidFieldError(
                "Field lives on a different mesh than the Gram operator."
            )
        return tau.values

    def weak(self, tau: ScalarField) -> np.ndarray:
        """`G τ`, the moments of `Rτ` against the nodal basis."""
        values = self._values(tau)
        laplacian = mass_factorization(self.mesh).solve(self.stiffness @ values)
        return self.mass @ values + self.beta**2 * (self.stiffness @ laplacian)

    def solve_weak(self, moments: np.ndarray) -> np.ndarray:
        """Nodal values `x` with `G x = moments`."""
        n = self.mesh.n_vertices
        rhs = np.concatenate((np.asarray(moments, dtype=float), np.zeros(n)))
        return self._mixed.solve(rhs)[:n]


def gram_assemble(mesh: "Mesh", beta: float) -> GramOperator:
    """Assemble and factorize the Gram operator with scaling `beta`.

    Raises:
        ConfigurationError: If `beta` is not positive.

    """
    if not beta > 0:
        raise ConfigurationError(f"The Gram scaling β must be positive, got {beta}.")
    mass = assemble_mass(mesh)
    stiffness = assemble_stiffness(mesh, 1.0)
    # [[M, βK], [βK, −M]] [x; y] = [b; 0] eliminates y = β M⁻¹ K x
    mixed = sp.bmat([[mass, beta * stiffness], [beta * stiffness, -mass]], format="csc")
    operator = GramOperator(mesh, float(beta), mass, stiffness, Factorization(mixed))
    LOGGER.debug("Assembled Gram operator with β = %.3e on %r.", beta, mesh)
    return operator


def gram_apply(gram: GramOperator, tau: ScalarField) -> ScalarField:
    """`Rτ = τ + β²Δ²τ` as a nodal field."""
    return ScalarField(gram.mesh, mass_factorization(gram.mesh).solve(gram.weak(tau)))


def gram_solve(gram: GramOperator, moments: np.ndarray) -> ScalarField:
    """The field whose Gram moments are `moments`, i.e. `G⁻¹ moments`."""
    return ScalarField(gram.mesh, gram.solve_weak(moments))
