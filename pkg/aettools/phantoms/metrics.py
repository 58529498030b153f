from typing import Union

from aettools.exceptions import InvalidFieldError
from aettools.fem.fields import CellField, ScalarField
from aettools.fem.operations import l2_norm

__all__ = ("relative_error",)


def relative_error(
    truth: Union[ScalarField, CellField], recon: Union[ScalarField, CellField]
) -> float:
    """Relative L² error `‖σ_t − σ_r‖ / ‖σ_t‖`."""
    scale = l2_norm(truth)
    if scale == 0:
        raise InvalidFieldError("The reference field has zero norm.")
    return l2_norm(truth - recon) / scale
