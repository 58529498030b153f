"""Forward solvers of the generalized Laplace equation `∇·σ∇u = 0`.

[`ElectrodeSystem`][aettools.forward.solvers.ElectrodeSystem] assembles and
factorizes the electrode-model system once for a fixed conductivity, so that
every current pattern (and every linearized solve built on top of it) reuses
the same factorization. [`DirichletSystem`][aettools.forward.solvers.DirichletSystem]
does the same for prescribed boundary potentials.
"""

import time
from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional, Union

import numpy as np

from aettools.config import CONFIG
from aettools.exceptions import InvalidFieldError, MeshError, SingularSystemError
from aettools.fem.assembly import (
    ConductanceProfile,
    RobinBlocks,
    assemble_robin_electrode,
    assemble_stiffness,
)
from aettools.fem.fields import ScalarField
from aettools.fem.solvers import (
    ConstrainedFactorization,
    SolveReport,
    dirichlet_basis,
    zero_sum_basis,
)
from aettools.forward.electrodes import ConstantProfile, conductance_profiles
from aettools.logger import LOGGER
from aettools.models.electrodes import CemModel, ScemModel
from aettools.models.patterns import CurrentPattern

if TYPE_CHECKING:  # pragma: no cover
    from aettools.mesh.types import Mesh

__all__ = (
    "ElectrodeModelLike",
    "ForwardSolution",
    "BoundaryTrace",
    "ElectrodeSystem",
    "DirichletSystem",
    "solve_scem",
    "solve_cem",
    "solve_dcm",
)

ElectrodeModelLike = Union[
    ScemModel, CemModel, ConductanceProfile, Sequence[ConductanceProfile]
]

_BROKEN_RESIDUAL = 1e-6


@dataclass(frozen=True, eq=False)
class ForwardSolution:
    """Interior potential `u` and electrode voltages `U` (empty without
    electrodes)."""

    u: ScalarField
    U: np.ndarray
    report: Optional[SolveReport] = None
    pattern: Optional[CurrentPattern] = None

    @property
    def mesh(self) -> "Mesh":
        return self.u.mesh


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """Prescribed potential `values` at the vertices `nodes` of a mesh."""

    mesh: "Mesh"
    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if np.shape(self.nodes) != np.shape(self.values):
            raise InvalidFieldError("Boundary trace nodes and values differ in length.")
        if not np.all(np.isfinite(self.values)):
            raise InvalidFieldError("Boundary trace has non-finite values.")


def _report(
    factorization: ConstrainedFactorization,
    x: np.ndarray,
    load: np.ndarray,
    start: float,
    offset: Optional[np.ndarray] = None,
) -> SolveReport:
    residual = factorization.residual(x, load, offset)
    report = SolveReport(1, residual, time.perf_counter() - start, "direct")
    if residual > _BROKEN_RESIDUAL:
        raise SingularSystemError(
            f"Forward solve residual {residual:.3e}; the system is numerically singular."
        )
    if residual > CONFIG.solver_tol:
        LOGGER.warning(
            "Forward solve residual %.3e exceeds the tolerance %.1e.",
            residual,
            CONFIG.solver_tol,
        )
    return report


class ElectrodeSystem:
    """The electrode-model system at a fixed conductivity.

    Unknowns are the nodal potential `u` followed by the `L` electrode
    voltages `U`. Grounding `Σ U_l = 0` is enforced by eliminating `U_L`.

    Parameters:
        mesh: Mesh with electrode-labelled boundary edges.
        sigma: Conductivity, strictly positive.
        model: An electrode model or explicit conductance profile(s).

    """

    def __init__(
        self, mesh: "Mesh", sigma: ScalarField, model: ElectrodeModelLike
    ) -> None:
        if sigma.mesh is not mesh:
            raise InvalidFieldError("σ lives on a different mesh.")
        if mesh.electrode_count == 0:
            raise MeshError("Mesh has no electrodes.")
        start = time.perf_counter()
        self.mesh = mesh
        self.sigma = sigma
        self.model = model
        self.profiles = conductance_profiles(mesh, model)
        self.stiffness = assemble_stiffness(mesh, sigma)
        self.robin: RobinBlocks = assemble_robin_electrode(mesh, self.profiles)
        self.matrix = self.robin.system_matrix(self.stiffness)

        n, count = mesh.n_vertices, mesh.electrode_count
        self.basis = zero_sum_basis(n + count, np.arange(n, n + count))
        self.factorization = ConstrainedFactorization(self.matrix, self.basis)
        LOGGER.debug(
            "Electrode system with %d unknowns ready in %.3f s.",
            n + count,
            time.perf_counter() - start,
        )

    @property
    def n_nodes(self) -> int:
        return self.mesh.n_vertices

    @property
    def electrode_count(self) -> int:
        return self.mesh.electrode_count

    def solve_load(
        self, load_u: np.ndarray, load_U: Optional[np.ndarray] = None
    ) -> tuple[np.ndarray, np.ndarray]:
        """Solve the grounded system for an arbitrary load.

        Returns:
            The nodal and electrode parts of the solution.

        """
        load = np.concatenate(
            (
                np.asarray(load_u, dtype=float),
                np.zeros(self.electrode_count) if load_U is None else load_U,
            )
        )
        x = self.factorization.solve(load)
        return x[: self.n_nodes], x[self.n_nodes :]

    def solve(self, pattern: CurrentPattern) -> ForwardSolution:
        """Potentials generated by injecting `pattern`."""
        if pattern.count != self.electrode_count:
            raise InvalidFieldError(
                f"Pattern has {pattern.count} currents for {self.electrode_count} electrodes."
            )
        start = time.perf_counter()
        load = np.concatenate((np.zeros(self.n_nodes), pattern.as_array()))
        x = self.factorization.solve(load)
        report = _report(self.factorization, x, load, start)
        LOGGER.debug(
            "Solved %s: residual %.2e in %.3f s.",
            pattern.label or "pattern",
            report.residual_norm,
            report.wall_time,
        )
        return ForwardSolution(
            u=ScalarField(self.mesh, x[: self.n_nodes]),
            U=x[self.n_nodes :],
            report=report,
            pattern=pattern,
        )

    def electrode_currents(self, solution: ForwardSolution) -> np.ndarray:
        """Currents `∫_{e_l} ζ (U_l − u)` leaving through each electrode."""
        return self.robin.UU @ solution.U + self.robin.uU.T @ solution.u.values


class DirichletSystem:
    """The continuum model with prescribed potential on the Dirichlet-labelled
    boundary, at a fixed conductivity.

    `fixed` overrides the constrained vertices; by default they are the
    vertices of the Dirichlet-labelled edges.
    """

    def __init__(
        self, mesh: "Mesh", sigma: ScalarField, fixed: Optional[np.ndarray] = None
    ) -> None:
        if sigma.mesh is not mesh:
            raise InvalidFieldError("σ lives on a different mesh.")
        self.mesh = mesh
        self.sigma = sigma
        self.fixed = mesh.dirichlet_nodes if fixed is None else np.asarray(fixed)
        if len(self.fixed) == 0:
            raise MeshError("Mesh has no Dirichlet-labelled boundary edges.")
        self.stiffness = assemble_stiffness(mesh, sigma)
        self.basis, _ = dirichlet_basis(mesh.n_vertices, self.fixed, 0.0)
        self.factorization = ConstrainedFactorization(self.stiffness, self.basis)

    def boundary_values(
        self,
        g: Union[BoundaryTrace, ScalarField, Callable[[np.ndarray, np.ndarray], np.ndarray]],
    ) -> np.ndarray:
        """Values of the boundary data at the Dirichlet nodes."""
        if isinstance(g, BoundaryTrace):
            if g.mesh is not self.mesh:
                raise InvalidFieldError("Boundary trace lives on a different mesh.")
            values = dict(zip(np.asarray(g.nodes).tolist(), np.asarray(g.values)))
            missing = [n for n in self.fixed.tolist() if n not in values]
            if missing:
                raise InvalidFieldError(
                    f"Boundary trace is missing {len(missing)} Dirichlet nodes."
                )
            return np.array([values[n] for n in self.fixed.tolist()])
        if isinstance(g, ScalarField):
            if g.mesh is not self.mesh:
                raise InvalidFieldError("Boundary data lives on a different mesh.")
            return g.values[self.fixed]
        x, y = self.mesh.vertices[self.fixed].T
        return np.broadcast_to(np.asarray(g(x, y), dtype=float), x.shape).copy()

    def solve_load(self, load: np.ndarray) -> np.ndarray:
        """Solve with homogeneous boundary values for an arbitrary load."""
        return self.factorization.solve(load)

    def solve(self, g) -> ForwardSolution:
        """Potential taking the boundary values `g`; see
        [`boundary_values`][aettools.forward.solvers.DirichletSystem.boundary_values]."""
        start = time.perf_counter()
        offset = np.zeros(self.mesh.n_vertices)
        offset[self.fixed] = self.boundary_values(g)
        load = np.zeros(self.mesh.n_vertices)
        x = self.factorization.solve(load, offset=offset)
        report = _report(self.factorization, x, load, start, offset)
        return ForwardSolution(u=ScalarField(self.mesh, x), U=np.zeros(0), report=report)


def solve_scem(
    mesh: "Mesh",
    sigma: ScalarField,
    zeta: Union[ScemModel, ConductanceProfile, Sequence[ConductanceProfile]],
    pattern: CurrentPattern,
) -> ForwardSolution:
    """Smoothened complete electrode model solve for one current pattern."""
    return ElectrodeSystem(mesh, sigma, zeta).solve(pattern)


def solve_cem(
    mesh: "Mesh",
    sigma: ScalarField,
    z: Union[float, Sequence[float], np.ndarray],
    pattern: CurrentPattern,
) -> ForwardSolution:
    """Complete electrode model solve with contact impedances `z`, one shared
    value or one per electrode."""
    if np.ndim(z) > 0:
        impedances = np.asarray(z, dtype=float).ravel()
        if np.any(impedances <= 0):
            raise InvalidFieldError("Contact impedances must be positive.")
        model: ElectrodeModelLike = [ConstantProfile(1.0 / value) for value in impedances]
    else:
        model = CemModel(impedance=float(z))
    return ElectrodeSystem(mesh, sigma, model).solve(pattern)


def solve_dcm(mesh: "Mesh", sigma: ScalarField, g) -> ForwardSolution:
    """Continuum model solve with potential `g` on the Dirichlet boundary."""
    return DirichletSystem(mesh, sigma).solve(g)
