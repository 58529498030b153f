from typing import Annotated

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from aettools.models.utils import PhysicalField

__all__ = ("CurrentPattern", "CHARGE_CONSERVATION_TOL")

CHARGE_CONSERVATION_TOL = 1e-12


class CurrentPattern(BaseModel):
    """Currents injected through the electrodes, one value per electrode."""

    model_config = ConfigDict(frozen=True)

    currents: Annotated[
        tuple[float, ...],
        PhysicalField(
            min_length=1, description="Injected current I_l per electrode.", unit="A"
        ),
    ]

    label: Annotated[
        str, PhysicalField(description="Short human-readable name of the pattern.")
    ] = ""

    @field_validator("currents")
    @classmethod
    def charge_is_conserved(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        """The injected currents must sum to zero."""
        currents = np.asarray(value, dtype=float)
        if not np.all(np.isfinite(currents)):
            raise ValueError("Currents must be finite.")
        scale = max(1.0, float(np.max(np.abs(currents))))
        if abs(float(np.sum(currents))) > CHARGE_CONSERVATION_TOL * scale:
            raise ValueError(
                f"Currents sum to {np.sum(currents):.3e}, violating charge conservation."
            )
        return value

    @property
    def count(self) -> int:
        return len(self.currents)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.currents, dtype=float)
