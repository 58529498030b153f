"""Fréchet derivative of the power density map and its adjoint.

For a perturbation `τ` of the conductivity the derivative is

    E'(σ)τ = τ |∇u|² + 2σ ∇u·∇ξ,

where `ξ` solves the linearized forward problem with load `−∫ τ ∇u·∇w`.
Its L² adjoint applied to a per-triangle `z` is

    E'(σ)* z = z |∇u|² − ∇u·∇v,

with `v` solving the same system for the load `∫ 2σ z ∇u·∇w`. Both use the
triangle averages of σ and τ, which makes them the exact derivative of the
discrete map and exact adjoints of each other up to solver precision.
"""

from collections.abc import Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Optional, Union

import numpy as np

from aettools.config import CONFIG
from aettools.exceptions import InvalidFieldError
from aettools.fem.assembly import assemble_cell_load, cell_coefficient
from aettools.fem.fields import CellField, ScalarField
from aettools.fem.operations import gradient_per_triangle
from aettools.fem.solvers import mass_solve
from aettools.forward.solvers import DirichletSystem
from aettools.sensitivity.state import (
    AdjointSolution,
    DerivativeSolution,
    LinearizationState,
)

__all__ = (
    "derivative_solve",
    "apply_derivative",
    "adjoint_solve",
    "apply_adjoint",
    "adjoint_density",
    "derivative",
    "adjoint",
    "apply_normal",
    "weak_normal",
    "weak_adjoint",
    "measurement_pool",
    "derivative_solve_dcm",
    "adjoint_solve_dcm",
)


def _gradient_load(state: LinearizationState, weights: np.ndarray) -> np.ndarray:
    """`b_i = Σ_T weights_T |T| ∇u_T · ∇w_i`."""
    mesh = state.mesh
    local = np.einsum("td,tid->ti", state.grad_u, mesh.gradients)
    local *= (weights * mesh.areas)[:, None]
    return np.bincount(
        mesh.triangles.ravel(), weights=local.ravel(), minlength=mesh.n_vertices
    )


def _linear_solve(
    state: LinearizationState, load: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(state.system, DirichletSystem):
        return state.system.solve_load(load), np.zeros(0)
    return state.system.solve_load(load)


def _cells(
    state: LinearizationState, field: Union[ScalarField, CellField], name: str
) -> np.ndarray:
    if field.mesh is not state.mesh:
        raise InvalidFieldError(
            f"{name} lives on a different mesh than the linearization."
        )
    return cell_coefficient(state.mesh, field, name)


def derivative_solve(
    state: LinearizationState, tau: Union[ScalarField, CellField]
) -> DerivativeSolution:
    """Solve the linearized forward problem for the perturbation `tau`.

    With electrodes the perturbation carries no net electrode currents and
    is grounded, `Σ Ξ_l = 0`.
    """
    load = -_gradient_load(state, _cells(state, tau, "τ"))
    xi, Xi = _linear_solve(state, load)
    return DerivativeSolution(ScalarField(state.mesh, xi), Xi)


def apply_derivative(
    state: LinearizationState,
    tau: Union[ScalarField, CellField],
    deriv: DerivativeSolution,
) -> CellField:
    """Per-triangle `E'(σ)τ = τ|∇u|² + 2σ∇u·∇ξ`."""
    grad_xi = gradient_per_triangle(deriv.xi)
    coupling = np.einsum("td,td->t", state.grad_u, grad_xi)
    values = _cells(state, tau, "τ") * state.grad_u_squared
    values += 2.0 * state.sigma_cells * coupling
    return CellField(state.mesh, values)


def adjoint_solve(state: LinearizationState, z: CellField) -> AdjointSolution:
    """Solve the adjoint problem with load `∫ 2σ z ∇u·∇w`."""
    load = _gradient_load(state, 2.0 * state.sigma_cells * _cells(state, z, "z"))
    v, V = _linear_solve(state, load)
    return AdjointSolution(ScalarField(state.mesh, v), V)


def adjoint_density(
    state: LinearizationState, z: CellField, adj: AdjointSolution
) -> CellField:
    """Per-triangle `z|∇u|² − ∇u·∇v`, the adjoint before projection onto
    nodal fields."""
    grad_v = gradient_per_triangle(adj.v)
    values = _cells(state, z, "z") * state.grad_u_squared - np.einsum(
        "td,td->t", state.grad_u, grad_v
    )
    return CellField(state.mesh, values)


def apply_adjoint(
    state: LinearizationState, z: CellField, adj: AdjointSolution
) -> ScalarField:
    """`E'(σ)* z` as a nodal field, the L² projection of
    [`adjoint_density`][aettools.sensitivity.frechet.adjoint_density]."""
    density = adjoint_density(state, z, adj)
    load = assemble_cell_load(state.mesh, density.values)
    return ScalarField(state.mesh, mass_solve(state.mesh, load))


def derivative(
    state: LinearizationState, tau: Union[ScalarField, CellField]
) -> CellField:
    return apply_derivative(state, tau, derivative_solve(state, tau))


def adjoint(state: LinearizationState, z: CellField) -> ScalarField:
    return apply_adjoint(state, z, adjoint_solve(state, z))


def weak_adjoint(state: LinearizationState, z: CellField) -> np.ndarray:
    """Moments `∫ (E'(σ)* z) w_i` against the nodal basis, without the mass
    solve."""
    density = adjoint_density(state, z, adjoint_solve(state, z))
    return assemble_cell_load(state.mesh, density.values)


@contextmanager
def measurement_pool(
    threads: Optional[int], count: int
) -> Iterator[Optional[ThreadPoolExecutor]]:
    """Worker pool for `count` per-measurement solves, or `None` when they
    run inline (one thread or one measurement).

    The workers share the factorization of the forward system, whose
    triangular solves are serialized; they overlap the load assembly,
    gradients and projections around those solves.
    """
    threads = CONFIG.threads if threads is None else threads
    if threads <= 1 or count <= 1:
        yield None
        return
    with ThreadPoolExecutor(max_workers=min(threads, count)) as pool:
        yield pool


def _map_states(
    func,
    states: Sequence[LinearizationState],
    threads: Optional[int],
    pool: Optional[ThreadPoolExecutor] = None,
) -> list:
    if pool is not None:
        return list(pool.map(func, states))
    with measurement_pool(threads, len(states)) as own:
        if own is None:
            return [func(state) for state in states]
        return list(own.map(func, states))


def weak_normal(
    states: Sequence[LinearizationState],
    tau: ScalarField,
    threads: Optional[int] = None,
    pool: Optional[ThreadPoolExecutor] = None,
) -> np.ndarray:
    """Moments of `Σ_m E'_m* E'_m τ` against the nodal basis, computed on
    `pool` when given."""
    if not states:
        raise InvalidFieldError("No linearization states given.")
    parts = _map_states(
        lambda state: weak_adjoint(state, derivative(state, tau)), states, threads, pool
    )
    return np.sum(parts, axis=0)


def apply_normal(
    states: Sequence[LinearizationState],
    tau: ScalarField,
    threads: Optional[int] = None,
) -> ScalarField:
    """Gauss-Newton normal operator `Σ_m E'_m(σ)* E'_m(σ) τ`.

    Measurements are processed on a
    [`measurement_pool`][aettools.sensitivity.frechet.measurement_pool] of
    `threads` workers (`CONFIG.threads` by default).
    """
    mesh = tau.mesh
    return ScalarField(mesh, mass_solve(mesh, weak_normal(states, tau, threads)))


def _require_dirichlet(state: LinearizationState) -> None:
    if not isinstance(state.system, DirichletSystem):
        raise InvalidFieldError(
            "The linearization state has electrode boundary conditions."
        )


def derivative_solve_dcm(
    state: LinearizationState, tau: Union[ScalarField, CellField]
) -> DerivativeSolution:
    """[`derivative_solve`][aettools.sensitivity.frechet.derivative_solve] with
    `ξ = 0` on the Dirichlet boundary."""
    _require_dirichlet(state)
    return derivative_solve(state, tau)


def adjoint_solve_dcm(state: LinearizationState, z: CellField) -> AdjointSolution:
    """[`adjoint_solve`][aettools.sensitivity.frechet.adjoint_solve] with
    `v = 0` on the Dirichlet boundary."""
    _require_dirichlet(state)
    return adjoint_solve(state, z)
