import math
from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from aettools.models.utils import PhysicalField

__all__ = ("LmConfig",)


class LmConfig(BaseModel):
    """Hyperparameters of the Levenberg-Marquardt reconstructions.

    The regularization parameter decays as `alpha0 / decay**k`.
    """

    model_config = ConfigDict(frozen=True)

    alpha0: Annotated[
        float, PhysicalField(gt=0, description="Initial regularization α₀.")
    ] = 50.0
    decay: Annotated[
        float, PhysicalField(gt=1, description="Decay base a of the α schedule.")
    ] = 1.2
    beta: Annotated[
        float,
        PhysicalField(
            gt=0, description="Scaling β of the H² seminorm in the Gram operator."
        ),
    ] = 1.2e-3
    known_width: Annotated[
        float,
        PhysicalField(
            ge=0,
            description="Width δ_d of the boundary collar where σ is known.",
            unit="m",
        ),
    ] = 0.045
    step_tol: Annotated[
        float,
        PhysicalField(gt=0, description="Stop when the L² norm of the step drops below."),
    ] = 1e-4
    max_iter: Annotated[
        int, PhysicalField(ge=0, description="Iteration cap of a single LM loop.")
    ] = 15
    cg_tol: Annotated[
        float,
        PhysicalField(gt=0, lt=1, description="Relative tolerance of the step solve."),
    ] = 1e-8
    cg_max_iter: Annotated[
        int,
        PhysicalField(gt=0, description="Iteration cap of the step solve."),
    ] = 200

    eta_b_target: Annotated[
        float,
        PhysicalField(
            gt=0,
            description="Electrode-voltage error that ends the first mixed phase.",
        ),
    ] = 1e-3
    phase1_max_iter: Annotated[
        int, PhysicalField(ge=0, description="Iteration cap N_c of the first phase.")
    ] = 10
    phase2_max_iter: Annotated[
        int, PhysicalField(ge=0, description="Iteration cap N_d of the second phase.")
    ] = 30
    submesh_distance: Annotated[
        float,
        PhysicalField(
            ge=0,
            description="Distance d from the boundary at which the interior domain starts.",
            unit="m",
        ),
    ] = 0.005
    phase2_known_width: Annotated[
        float,
        PhysicalField(
            ge=0,
            description="Collar width used on the interior domain.",
            unit="m",
        ),
    ] = 0.0

    smooth_truncation: Annotated[
        bool,
        PhysicalField(
            description="Mollify the truncated update to soften the collar edge."
        ),
    ] = False
    smooth_radius: Annotated[
        float,
        PhysicalField(
            ge=0, description="Mollifier radius used by `smooth_truncation`.", unit="m"
        ),
    ] = 0.0
    linearization: Annotated[
        Literal["electrode", "dirichlet"],
        PhysicalField(
            description=(
                "Boundary condition of the linearized problems in LM-SCEM: the "
                "electrode model, or a frozen boundary potential."
            )
        ),
    ] = "electrode"

    @field_validator("eta_b_target")
    @classmethod
    def not_nan(cls, value: float) -> float:
        if math.isnan(value):
            raise ValueError("eta_b_target must not be NaN.")
        return value

    @model_validator(mode="after")
    def smoothing_needs_radius(self) -> "LmConfig":
        if self.smooth_truncation and self.smooth_radius <= 0:
            raise ValueError("smooth_truncation requires a positive smooth_radius.")
        return self

    def alpha(self, k: int) -> float:
        return self.alpha0 / self.decay**k
