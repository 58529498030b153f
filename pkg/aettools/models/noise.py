import math
from typing import Annotated

from pydantic import BaseModel, ConfigDict, field_validator

from aettools.models.utils import PhysicalField

__all__ = ("NoiseSpec",)


class NoiseSpec(BaseModel):
    """Additive Gaussian white noise at a prescribed signal-to-noise ratio.

    `snr_db = inf` means noise-free data.
    """

    model_config = ConfigDict(frozen=True)

    snr_db: Annotated[
        float,
        PhysicalField(
            description="Signal to noise ratio 20 log10(|E| / |N|).", unit="dB"
        ),
    ] = 60.0

    seed: Annotated[
        int, PhysicalField(ge=0, description="Seed of the noise generator.")
    ] = 0

    @field_validator("snr_db")
    @classmethod
    def finite_or_infinite(cls, value: float) -> float:
        if math.isnan(value) or value == -math.inf:
            raise ValueError("snr_db must be a finite number or +inf.")
        return value

    @property
    def noise_free(self) -> bool:
        return self.snr_db == math.inf

    def for_pattern(self, index: int) -> "NoiseSpec":
        """Noise spec of the `index`-th measurement, with an independent stream."""
        return self.model_copy(update={"seed": self.seed + index})
