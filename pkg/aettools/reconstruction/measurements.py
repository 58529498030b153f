"""Measured data of the reconstructions and the simulators producing it."""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from aettools.exceptions import InvalidFieldError
from aettools.fem.fields import CellField, ScalarField
from aettools.forward.power import PowerDensity, power_density
from aettools.forward.solvers import (
    BoundaryTrace,
    DirichletSystem,
    ElectrodeModelLike,
    ElectrodeSystem,
)
from aettools.logger import LOGGER
from aettools.mesh.queries import transfer_cells
from aettools.models.noise import NoiseSpec
from aettools.models.patterns import CurrentPattern
from aettools.phantoms.noise import add_noise

if TYPE_CHECKING:  # pragma: no cover
    from aettools.mesh.types import Mesh, Submesh

__all__ = (
    "Measurement",
    "simulate_measurements",
    "simulate_dcm_measurements",
    "boundary_voltage_error",
    "extract_boundary_trace",
)


@dataclass(frozen=True, eq=False)
class Measurement:
    """One power density measurement.

    Electrode measurements carry the injected `pattern` and, when known, the
    electrode voltages `U_true` it produced. Measurements of the continuum
    model carry the prescribed boundary `trace` instead. `E_delta` may dip
    slightly below zero after noise is added; it is kept as is.
    """

    E_delta: PowerDensity
    pattern: Optional[CurrentPattern] = None
    U_true: Optional[np.ndarray] = None
    trace: Optional[BoundaryTrace] = None

    def __post_init__(self) -> None:
        if (self.pattern is None) == (self.trace is None):
            raise InvalidFieldError(
                "A measurement needs exactly one of a current pattern and a "
                "boundary trace."
            )
        if self.trace is not None and self.trace.mesh is not self.E_delta.mesh:
            raise InvalidFieldError(
                "Boundary trace and power density live on different meshes."
            )

    @property
    def mesh(self) -> "Mesh":
        return self.E_delta.mesh

    @property
    def label(self) -> str:
        return self.pattern.label if self.pattern is not None else "trace"


def simulate_measurements(
    mesh: "Mesh",
    sigma: ScalarField,
    model: ElectrodeModelLike,
    patterns: Sequence[CurrentPattern],
    noise: NoiseSpec,
    target: Optional["Mesh"] = None,
) -> tuple[list[Measurement], list[CellField]]:
    """Simulate electrode measurements of `sigma`.

    With a `target` mesh the power densities computed on `mesh` are carried
    onto the triangles of `target` before the noise is added, so that the
    data of a reconstruction on `target` does not come from its own forward
    model. Pattern `m` receives noise drawn from the stream
    `noise.for_pattern(m)`.

    Returns:
        The noisy measurements and the noise-free power densities, both on
        `target` when given.

    """
    system = ElectrodeSystem(mesh, sigma, model)
    target = mesh if target is None else target
    measurements, clean = [], []
    for m, pattern in enumerate(patterns):
        solution = system.solve(pattern)
        power = transfer_cells(power_density(sigma, solution), target)
        measurements.append(
            Measurement(
                E_delta=add_noise(power, noise.for_pattern(m)),
                pattern=pattern,
                U_true=solution.U.copy(),
            )
        )
        clean.append(power)
        LOGGER.info(
            "Simulated %s: |U| = %.3e, max E = %.3e.",
            pattern.label,
            float(np.linalg.norm(solution.U)),
            power.max(),
        )
    return measurements, clean


def simulate_dcm_measurements(
    sigma: ScalarField,
    traces: Sequence[BoundaryTrace],
    noise: NoiseSpec,
    stream_offset: int = 0,
) -> list[Measurement]:
    """Simulate continuum-model measurements of `sigma` for prescribed
    boundary traces.

    Trace `m` is perturbed from the stream `noise.for_pattern(stream_offset + m)`.
    """
    system = DirichletSystem(sigma.mesh, sigma)
    measurements = []
    for m, trace in enumerate(traces):
        power = power_density(sigma, system.solve(trace))
        measurements.append(
            Measurement(
                E_delta=add_noise(power, noise.for_pattern(stream_offset + m)),
                trace=trace,
            )
        )
    return measurements


def boundary_voltage_error(U_true: np.ndarray, U_k: np.ndarray) -> float:
    """Relative electrode-voltage error `‖U^t − U^k‖ / ‖U^t‖`."""
    U_true, U_k = np.asarray(U_true, dtype=float), np.asarray(U_k, dtype=float)
    if U_true.shape != U_k.shape:
        raise InvalidFieldError(
            f"Voltage vectors differ in shape: {U_true.shape} and {U_k.shape}."
        )
    scale = np.linalg.norm(U_true)
    if scale == 0:
        raise InvalidFieldError("The reference voltage vector is zero.")
    return float(np.linalg.norm(U_true - U_k) / scale)


def extract_boundary_trace(u: ScalarField, submesh: "Submesh") -> BoundaryTrace:
    """Values of `u` at the parent vertices lying on the Dirichlet boundary
    of `submesh`, as a boundary trace on the submesh."""
    if u.mesh is not submesh.parent:
        raise InvalidFieldError("Potential does not live on the parent of the submesh.")
    nodes = submesh.mesh.dirichlet_nodes
    return BoundaryTrace(submesh.mesh, nodes, u.values[submesh.vertex_map[nodes]])
