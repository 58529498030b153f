"""Numerical self-checks of the forward models and the linearization.

These reports back the `aet check` command and the test-suite: the adjoint
identity `⟨E'τ, z⟩ = ⟨τ, E'*z⟩`, the second-order Taylor remainder of the
forward map, the Gram operator on a Neumann eigenfunction, and the power
density of both electrode models next to the electrode endpoints.
"""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

from aettools.exceptions import InvalidFieldError
from aettools.fem.fields import CellField, ScalarField
from aettools.fem.operations import l2_inner, l2_norm
from aettools.forward.patterns import fourier_pattern
from aettools.forward.power import power_density
from aettools.forward.solvers import (
    BoundaryTrace,
    DirichletSystem,
    ElectrodeSystem,
    ForwardSolution,
)
from aettools.mesh.generators import generate_disk_mesh, generate_rectangle_mesh
from aettools.mesh.queries import electrode_endpoints
from aettools.models.electrodes import CemModel, ElectrodeLayout, ScemModel
from aettools.sensitivity.frechet import (
    adjoint,
    apply_derivative,
    derivative,
    derivative_solve,
)
from aettools.sensitivity.gram import gram_apply, gram_assemble
from aettools.sensitivity.state import LinearizationState

if TYPE_CHECKING:  # pragma: no cover
    from aettools.mesh.types import Mesh

__all__ = (
    "AdjointReport",
    "TaylorReport",
    "GramReport",
    "EdgeReport",
    "random_smooth_field",
    "adjoint_identity_report",
    "taylor_report",
    "gram_eigenfunction_report",
    "electrode_edge_report",
)

AdjointHook = Callable[[LinearizationState, CellField], ScalarField]


@dataclass(frozen=True)
class AdjointReport:
    """`⟨E'τ, z⟩` against `⟨τ, E'*z⟩`, with the discrepancy relative to
    `‖E'τ‖ ‖z‖`."""

    forward_pairing: float
    adjoint_pairing: float
    relative: float


@dataclass(frozen=True)
class TaylorReport:
    """Linearization remainders at the steps `h` and `h/2`.

    `potential_ratio` compares `‖u(σ+hτ) − u(σ) − hξ‖` and `power_ratio`
    compares `‖E(σ+hτ) − E(σ) − hE'τ‖` between the two steps; both approach
    4 for a correct derivative.
    """

    step: float
    potential_remainders: tuple[float, float]
    power_remainders: tuple[float, float]

    @property
    def potential_ratio(self) -> float:
        return _ratio(*self.potential_remainders)

    @property
    def power_ratio(self) -> float:
        return _ratio(*self.power_remainders)


@dataclass(frozen=True)
class GramReport:
    """Relative L² error of `R cos(πx)` against `(1 + β²π⁴) cos(πx)` on the
    unit square at the mesh sizes `h` and `h/2`."""

    beta: float
    step: float
    errors: tuple[float, float]

    @property
    def ratio(self) -> float:
        return _ratio(*self.errors)


@dataclass(frozen=True)
class EdgeReport:
    """Largest power density within one edge length of an electrode endpoint,
    for the classic and the smoothened electrode model at the mesh sizes `h`
    and `h/2`.

    The classic model has a gradient singularity at the endpoints, so its
    peak grows under refinement while the smoothened peak settles.
    """

    step: float
    cem_peaks: tuple[float, float]
    scem_peaks: tuple[float, float]

    @property
    def ratios(self) -> tuple[float, float]:
        """CEM peak over SCEM peak at `h` and `h/2`."""
        return (
            _ratio(self.cem_peaks[0], self.scem_peaks[0]),
            _ratio(self.cem_peaks[1], self.scem_peaks[1]),
        )

    @property
    def cem_growth(self) -> float:
        return _ratio(self.cem_peaks[1], self.cem_peaks[0])

    @property
    def scem_change(self) -> float:
        return _ratio(self.scem_peaks[1], self.scem_peaks[0])


def _ratio(coarse: float, fine: float) -> float:
    return math.inf if fine == 0 else coarse / fine


def random_smooth_field(
    mesh: "Mesh",
    rng: np.random.Generator,
    low: float = -1.0,
    high: float = 1.0,
    modes: int = 4,
) -> ScalarField:
    """A random combination of low Fourier modes, rescaled to `[low, high]`."""
    x, y = mesh.vertices.T
    scale = max(float(np.ptp(x)), float(np.ptp(y)))
    values = np.zeros(mesh.n_vertices)
    for _ in range(modes):
        kx, ky = rng.uniform(-2.0, 2.0, size=2) * np.pi / scale
        values += rng.normal() * np.cos(kx * x + ky * y + rng.uniform(0, 2 * np.pi))
    spread = np.ptp(values)
    if spread == 0:
        return ScalarField.constant(mesh, 0.5 * (low + high))
    return ScalarField(mesh, low + (high - low) * (values - values.min()) / spread)


def adjoint_identity_report(
    state: LinearizationState,
    tau: ScalarField,
    z: CellField,
    adjoint_hook: Optional[AdjointHook] = None,
) -> AdjointReport:
    """Compare both sides of the adjoint identity for one measurement.

    `adjoint_hook` replaces the adjoint under test.
    """
    image = derivative(state, tau)
    back = (adjoint_hook or adjoint)(state, z)
    forward_pairing = l2_inner(image, z)
    adjoint_pairing = l2_inner(tau, back)
    scale = l2_norm(image) * l2_norm(z)
    discrepancy = abs(forward_pairing - adjoint_pairing)
    return AdjointReport(
        forward_pairing,
        adjoint_pairing,
        discrepancy / scale if scale > 0 else discrepancy,
    )


def _perturbed_solution(
    state: LinearizationState, sigma: ScalarField
) -> ForwardSolution:
    system = state.system
    if isinstance(system, ElectrodeSystem):
        if state.solution.pattern is None:
            raise InvalidFieldError("The forward solution does not record its pattern.")
        perturbed = ElectrodeSystem(state.mesh, sigma, system.model)
        return perturbed.solve(state.solution.pattern)
    trace = BoundaryTrace(state.mesh, system.fixed, state.solution.u.values[system.fixed])
    return DirichletSystem(state.mesh, sigma, fixed=system.fixed).solve(trace)


def taylor_report(
    state: LinearizationState, tau: ScalarField, step: float = 1e-2
) -> TaylorReport:
    """Linearization remainders of the potential and the power density.

    The perturbed forward problems are solved from scratch with the same
    boundary conditions as `state`, which must therefore use its forward
    system for the linearized solves.
    """
    base_power = state.power_density()
    deriv = derivative_solve(state, tau)
    power_slope = apply_derivative(state, tau, deriv)

    potential, power = [], []
    for h in (step, 0.5 * step):
        sigma = state.sigma + h * tau
        if sigma.min() <= 0:
            raise InvalidFieldError(f"σ + hτ is not positive for h = {h}.")
        solution = _perturbed_solution(state, sigma)
        potential.append(l2_norm(solution.u - state.solution.u - h * deriv.xi))
        power.append(
            l2_norm(power_density(sigma, solution) - base_power - h * power_slope)
        )
    return TaylorReport(step, (potential[0], potential[1]), (power[0], power[1]))


def gram_eigenfunction_report(beta: float, h: float) -> GramReport:
    """Apply the Gram operator to the Neumann eigenfunction `cos(πx)` of the
    unit square at mesh sizes `h` and `h/2`."""
    errors = []
    for size in (h, 0.5 * h):
        mesh = generate_rectangle_mesh(1.0, 1.0, size)
        tau = ScalarField.from_function(mesh, lambda x, y: np.cos(np.pi * x))
        expected = (1.0 + beta**2 * np.pi**4) * tau
        applied = gram_apply(gram_assemble(mesh, beta), tau)
        errors.append(l2_norm(applied - expected) / l2_norm(expected))
    return GramReport(beta, h, (errors[0], errors[1]))


def _edge_peak(power: CellField, endpoints: np.ndarray, reach: float) -> float:
    mesh = power.mesh
    distance = np.min(
        np.linalg.norm(mesh.centroids[:, None, :] - endpoints[None, :, :], axis=-1),
        axis=1,
    )
    near = distance <= reach
    if not np.any(near):
        raise InvalidFieldError(f"No triangle centroid within {reach:g} of an endpoint.")
    return float(np.max(power.values[near]))


def electrode_edge_report(
    radius: float,
    h: float,
    layout: ElectrodeLayout,
    impedance: float = 2.0,
    peak: float = 1.0,
    pattern: int = 1,
) -> EdgeReport:
    """Compare the power density of the classic electrode model with contact
    impedance `impedance` and the smoothened one with conductance `peak` next
    to the electrode endpoints of a disk with constant unit conductivity.

    The peak is the largest triangle value among the triangles whose
    centroid lies within one edge length of an endpoint.
    """
    cem, scem = [], []
    for size in (h, 0.5 * h):
        mesh = generate_disk_mesh(radius, size, layout)
        sigma = ScalarField.constant(mesh, 1.0)
        current = fourier_pattern(pattern, layout.count)
        endpoints = electrode_endpoints(mesh)
        for model, peaks in (
            (CemModel(impedance=impedance), cem),
            (ScemModel(peak=peak), scem),
        ):
            solution = ElectrodeSystem(mesh, sigma, model).solve(current)
            peaks.append(_edge_peak(power_density(sigma, solution), endpoints, size))
    return EdgeReport(h, (cem[0], cem[1]), (scem[0], scem[1]))
