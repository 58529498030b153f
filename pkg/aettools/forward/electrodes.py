from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING, Union

import numpy as np

from aettools.fem.assembly import ConductanceProfile, electrode_arclength
from aettools.models.electrodes import CemModel, ScemModel

if TYPE_CHECKING:  # pragma: no cover
    from aettools.mesh.types import Mesh

__all__ = (
    "BumpProfile",
    "ConstantProfile",
    "electrode_conductance_profile",
    "electrode_lengths",
    "conductance_profiles",
)


@dataclass(frozen=True)
class BumpProfile:
    """Smooth electrode conductance
    `ζ(x) = peak · exp(ε² / (x² − ε²) + 1)` for `|x| < ε`, zero elsewhere,
    with `ε` half the electrode length."""

    half_length: float
    peak: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        eps2 = self.half_length**2
        values = np.zeros_like(x)
        inside = x**2 < eps2
        values[inside] = self.peak * np.exp(eps2 / (x[inside] ** 2 - eps2) + 1.0)
        return values


@dataclass(frozen=True)
class ConstantProfile:
    """Constant electrode conductance, i.e. the inverse contact impedance."""

    value: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.full(np.shape(x), self.value)


def electrode_conductance_profile(l_e: float, peak: float) -> BumpProfile:
    """Bump-shaped conductance of an electrode of length `l_e` reaching `peak`
    at its centre and vanishing at its endpoints."""
    if l_e <= 0 or peak <= 0:
        raise ValueError("Electrode length and peak conductance must be positive.")
    return BumpProfile(half_length=0.5 * l_e, peak=peak)


def electrode_lengths(mesh: "Mesh") -> np.ndarray:
    """Length of every electrode along the polygonal boundary."""
    return np.array(
        [electrode_arclength(mesh, l)[2] for l in range(1, mesh.electrode_count + 1)]
    )


def conductance_profiles(
    mesh: "Mesh",
    model: Union[ScemModel, CemModel, ConductanceProfile, Sequence[ConductanceProfile]],
) -> list[ConductanceProfile]:
    """One conductance profile per electrode of `mesh` for an electrode model.

    SCEM bumps are fitted to the actual length of each electrode; CEM uses the
    constant `1/z`.
    """
    if isinstance(model, ScemModel):
        return [
            electrode_conductance_profile(length, model.peak)
            for length in electrode_lengths(mesh)
        ]
    if isinstance(model, CemModel):
        return [ConstantProfile(1.0 / model.impedance)] * mesh.electrode_count
    if isinstance(model, Sequence):
        return list(model)
    return [model] * mesh.electrode_count
