from typing import Annotated, Literal, Optional

from pydantic import BaseModel, ConfigDict

from aettools.models.utils import PhysicalField

__all__ = ("IterationRecord",)


class IterationRecord(BaseModel):
    """Summary of one LM iteration.

    `eta` is evaluated after the update; `eta_b` holds the electrode-voltage
    errors of the forward solves that started the iteration.
    """

    model_config = ConfigDict(frozen=True)

    k: Annotated[int, PhysicalField(ge=0, description="Iteration index.")]
    phase: Annotated[
        Literal["lm-scem", "lm-dcm"],
        PhysicalField(description="Loop that produced the record."),
    ]
    alpha: Annotated[float, PhysicalField(description="Regularization α_k.")]
    step_norm: Annotated[
        float, PhysicalField(ge=0, description="L² norm of the update τ_k.")
    ]
    step_residual: Annotated[
        float,
        PhysicalField(
            ge=0, description="Relative residual of the step equation, checked post hoc."
        ),
    ]
    misfit: Annotated[
        float,
        PhysicalField(
            ge=0, description="Σ_m ‖E^δ_m − E_m(σ_k)‖² over all measurements."
        ),
    ]
    eta: Annotated[
        Optional[float],
        PhysicalField(description="Relative L² error of σ_{k+1} if the truth is known."),
    ] = None
    eta_b: Annotated[
        tuple[float, ...],
        PhysicalField(description="Electrode-voltage error η^b per pattern."),
    ] = ()
    clamped: Annotated[
        int, PhysicalField(ge=0, description="Number of nodes clamped to the floor.")
    ] = 0
    wall_time: Annotated[
        float, PhysicalField(ge=0, description="Wall time of the iteration.", unit="s")
    ] = 0.0
    flags: Annotated[
        tuple[str, ...], PhysicalField(description="Events worth flagging.")
    ] = ()
