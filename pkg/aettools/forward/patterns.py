import math

import numpy as np

from aettools.exceptions import ConfigurationError
from aettools.models.patterns import CurrentPattern

__all__ = ("fourier_pattern", "fourier_patterns")


def fourier_pattern(n: int, L: int) -> CurrentPattern:
    """Trigonometric current pattern `I_l = cos(2π n l / L)`, `l = 1..L`.

    Raises:
        ConfigurationError: Unless `1 <= n < L`.

    """
    if L < 2:
        raise ConfigurationError(f"Fourier patterns need at least 2 electrodes, got {L}.")
    if n <= 0 or n >= L or n % L == 0:
        raise ConfigurationError(
            f"Pattern index n={n} is invalid for L={L} electrodes (need 1 <= n < L)."
        )
    l = np.arange(1, L + 1)
    currents = np.cos(2 * math.pi * n * l / L)
    # remove the rounding residue so that charge conservation holds exactly
    currents -= currents.mean()
    return CurrentPattern(currents=tuple(currents.tolist()), label=f"I^({n})")


def fourier_patterns(indices: list[int], L: int) -> list[CurrentPattern]:
    return [fourier_pattern(n, L) for n in indices]
