import numpy as np

from aettools.exceptions import InvalidFieldError
from aettools.fem.fields import CellField
from aettools.fem.operations import l2_norm
from aettools.logger import LOGGER
from aettools.models.noise import NoiseSpec

__all__ = ("add_noise", "realized_snr")


def realized_snr(clean: CellField, noisy: CellField) -> float:
    """`20 log10(‖E‖ / ‖E^δ − E‖)` in the L² norm, `inf` for identical fields."""
    noise = l2_norm(noisy - clean)
    return float("inf") if noise == 0 else 20.0 * np.log10(l2_norm(clean) / noise)


def add_noise(power: CellField, spec: NoiseSpec) -> CellField:
    """Add Gaussian white noise to a power density.

    The noise is drawn i.i.d. per triangle from `spec.seed` and rescaled so
    that its L² norm is exactly `‖E‖ · 10^(−snr_db / 20)`.

    Raises:
        InvalidFieldError: If the power density vanishes and the SNR is finite.

    """
    if spec.noise_free:
        return power
    signal = l2_norm(power)
    if signal == 0:
        raise InvalidFieldError("Cannot add noise at a finite SNR to a zero field.")
    draw = CellField(
        power.mesh, np.random.default_rng(spec.seed).standard_normal(len(power))
    )
    noise = draw * (signal * 10.0 ** (-spec.snr_db / 20.0) / l2_norm(draw))
    LOGGER.debug(
        "Added noise at %.1f dB (seed %d, ‖N‖ = %.3e).", spec.snr_db, spec.seed, l2_norm(noise)
    )
    return power + noise
