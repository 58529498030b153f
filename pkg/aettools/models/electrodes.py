import math
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from aettools.models.utils import PhysicalField

__all__ = ("ElectrodeLayout", "ScemModel", "CemModel", "ElectrodeModel")

_ARC_TOL = 1e-9


class ElectrodeLayout(BaseModel):
    """Placement of the `count` electrodes on the domain boundary.

    Angles are polar angles about the centre of the domain, measured
    counterclockwise from the positive x-axis. By default electrode `l` is
    centred at `2πl/L` and subtends the angle `2π coverage/L`, so all
    electrodes subtend the same central angle. On a circle `coverage` is the
    fraction of the boundary length under electrodes; on an ellipse the
    electrodes near the ends of the major axis are slightly longer.

    """

    model_config = ConfigDict(frozen=True)

    count: Annotated[
        int, PhysicalField(ge=1, description="Number of electrodes L.")
    ] = 16

    coverage: Annotated[
        float,
        PhysicalField(
            gt=0,
            le=1,
            description="Fraction of the boundary covered by electrodes.",
        ),
    ] = 0.5

    custom_arcs: Annotated[
        Optional[list[tuple[float, float]]],
        PhysicalField(
            description=(
                "Explicit per-electrode angular intervals `[start, end]`; "
                "overrides the uniform placement when given."
            ),
            unit="rad",
        ),
    ] = None

    @model_validator(mode="after")
    def check_custom_arcs(self) -> "ElectrodeLayout":
        if self.custom_arcs is None:
            return self
        if len(self.custom_arcs) != self.count:
            raise ValueError(
                f"{len(self.custom_arcs)} arcs given for {self.count} electrodes."
            )
        widths = [end - start for start, end in self.custom_arcs]
        if any(w <= 0 or w > 2 * math.pi for w in widths):
            raise ValueError("Every arc must have 0 < end - start <= 2π.")
        if max(widths) - min(widths) > _ARC_TOL:
            raise ValueError("All electrode arcs must subtend the same angle.")
        order = sorted(
            (start % (2 * math.pi), width)
            for (start, _), width in zip(self.custom_arcs, widths)
        )
        next_starts = [s for s, _ in order[1:]] + [order[0][0] + 2 * math.pi]
        for (start, width), next_start in zip(order, next_starts):
            if start + width > next_start + _ARC_TOL:
                raise ValueError("Electrode arcs overlap.")
        return self

    @property
    def arcs(self) -> list[tuple[float, float]]:
        """Angular interval `(start, end)` of every electrode, `end > start`."""
        if self.custom_arcs is not None:
            return [(float(s), float(e)) for s, e in self.custom_arcs]
        half = math.pi * self.coverage / self.count
        return [
            (2 * math.pi * k / self.count - half, 2 * math.pi * k / self.count + half)
            for k in range(1, self.count + 1)
        ]

    @property
    def centres(self) -> list[float]:
        return [0.5 * (s + e) for s, e in self.arcs]


class ScemModel(BaseModel):
    """Smoothened electrode model: a bump-shaped electrode conductance that
    vanishes at the electrode endpoints."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["scem"] = "scem"
    peak: Annotated[
        float,
        PhysicalField(
            gt=0, description="Maximum electrode conductance ζ.", unit="S/m^2"
        ),
    ] = 1.0


class CemModel(BaseModel):
    """Classic complete electrode model with a constant contact impedance."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["cem"] = "cem"
    impedance: Annotated[
        float,
        PhysicalField(gt=0, description="Contact impedance z_l.", unit="Ohm m^2"),
    ] = 2.0


ElectrodeModel = Annotated[Union[ScemModel, CemModel], Field(discriminator="kind")]
