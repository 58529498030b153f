"""Linearization of the power density map at a fixed conductivity.

A [`LinearizationState`][aettools.sensitivity.state.LinearizationState]
bundles everything the derivative and its adjoint need for one measurement:
the conductivity, the forward solution and the factorized system that the
linearized problems are solved with. States are immutable and can be used
from several threads at once.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Optional, Union

import numpy as np

from aettools.exceptions import StaleLinearizationError
from aettools.fem.fields import CellField, ScalarField
from aettools.fem.operations import gradient_per_triangle
from aettools.forward.solvers import DirichletSystem, ElectrodeSystem, ForwardSolution

if TYPE_CHECKING:  # pragma: no cover
    from aettools.mesh.types import Mesh

__all__ = (
    "LinearSystem",
    "LinearizationState",
    "DerivativeSolution",
    "AdjointSolution",
    "linearize",
    "frozen_boundary_system",
)

LinearSystem = Union[ElectrodeSystem, DirichletSystem]


@dataclass(frozen=True, eq=False)
class LinearizationState:
    """Linearization of one measurement at the conductivity `sigma`.

    Attributes:
        sigma: The conductivity the state was built at.
        solution: Forward solution of the measurement at `sigma`.
        system: Factorized system used for the derivative and adjoint solves.
            An [`ElectrodeSystem`][aettools.forward.solvers.ElectrodeSystem]
            gives the electrode boundary couplings with zero net electrode
            currents, a [`DirichletSystem`][aettools.forward.solvers.DirichletSystem]
            gives homogeneous Dirichlet conditions.

    """

    sigma: ScalarField
    solution: ForwardSolution
    system: LinearSystem

    def __post_init__(self) -> None:
        if self.system.sigma is not self.sigma:
            raise StaleLinearizationError(
                "The factorized system was built for a different conductivity."
            )
        if self.solution.mesh is not self.sigma.mesh:
            raise StaleLinearizationError(
                "The forward solution lives on a different mesh than σ."
            )

    @property
    def mesh(self) -> "Mesh":
        return self.sigma.mesh

    @property
    def uses_electrodes(self) -> bool:
        return isinstance(self.system, ElectrodeSystem)

    @cached_property
    def grad_u(self) -> np.ndarray:
        """`(T, 2)` gradient of the forward potential."""
        return gradient_per_triangle(self.solution.u)

    @cached_property
    def grad_u_squared(self) -> np.ndarray:
        return np.einsum("td,td->t", self.grad_u, self.grad_u)

    @cached_property
    def sigma_cells(self) -> np.ndarray:
        return self.sigma.cell_average().values

    def power_density(self) -> CellField:
        """`E(σ) = σ |∇u|²` of this measurement."""
        return CellField(self.mesh, self.sigma_cells * self.grad_u_squared)

    def check_current(self, sigma: ScalarField) -> None:
        """Raise if the state was not built at `sigma`."""
        if sigma is self.sigma:
            return
        if sigma.mesh is not self.mesh or not np.array_equal(
            sigma.values, self.sigma.values
        ):
            raise StaleLinearizationError(
                "Linearization state does not match the current conductivity."
            )


@dataclass(frozen=True, eq=False)
class DerivativeSolution:
    """Potential perturbation `ξ` and electrode voltage perturbations `Ξ`
    (empty without electrodes)."""

    xi: ScalarField
    Xi: np.ndarray


@dataclass(frozen=True, eq=False)
class AdjointSolution:
    """Adjoint potential `v` and adjoint electrode voltages `V` (empty without
    electrodes)."""

    v: ScalarField
    V: np.ndarray


def frozen_boundary_system(system: ElectrodeSystem) -> DirichletSystem:
    """Homogeneous Dirichlet system on the whole boundary at the conductivity
    of `system`, used to linearize with the boundary potential held fixed."""
    return DirichletSystem(system.mesh, system.sigma, fixed=system.mesh.boundary_nodes)


def linearize(
    system: LinearSystem,
    solutions: Sequence[ForwardSolution],
    linear_system: Optional[LinearSystem] = None,
) -> list[LinearizationState]:
    """Linearization states of several measurements sharing one factorization.

    Parameters:
        system: The factorized forward system the solutions were computed with.
        solutions: One forward solution per measurement.
        linear_system: System for the linearized solves, if it differs from
            `system` (see
            [`frozen_boundary_system`][aettools.sensitivity.state.frozen_boundary_system]).

    """
    linear = system if linear_system is None else linear_system
    if linear.sigma is not system.sigma:
        raise StaleLinearizationError(
            "Forward and linearized systems use different conductivities."
        )
    return [
        LinearizationState(system.sigma, solution, linear) for solution in solutions
    ]
