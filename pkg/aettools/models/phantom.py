import math
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from aettools.models.utils import PhysicalField

__all__ = (
    "CircleRegion",
    "EllipseRegion",
    "PolygonRegion",
    "Region",
    "PhantomSpec",
)


class _RegionBase(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: Annotated[str, PhysicalField(description="Tissue name.")]
    conductivity: Annotated[
        float,
        PhysicalField(gt=0, description="Conductivity of the region.", unit="S/m"),
    ]

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of the `(N, 2)` points lying inside the region."""
        raise NotImplementedError

    def outline(self, n: int = 64) -> np.ndarray:
        """`n` points on the region boundary."""
        raise NotImplementedError


class CircleRegion(_RegionBase):
    kind: Literal["circle"] = "circle"
    centre: Annotated[
        tuple[float, float], PhysicalField(description="Centre.", unit="m")
    ]
    radius: Annotated[float, PhysicalField(gt=0, description="Radius.", unit="m")]

    def contains(self, points: np.ndarray) -> np.ndarray:
        offset = np.asarray(points) - np.asarray(self.centre)
        return np.einsum("ij,ij->i", offset, offset) <= self.radius**2

    def outline(self, n: int = 64) -> np.ndarray:
        t = np.linspace(0, 2 * math.pi, n, endpoint=False)
        return np.asarray(self.centre) + self.radius * np.column_stack(
            (np.cos(t), np.sin(t))
        )


class EllipseRegion(_RegionBase):
    kind: Literal["ellipse"] = "ellipse"
    centre: Annotated[
        tuple[float, float], PhysicalField(description="Centre.", unit="m")
    ]
    semi_axes: Annotated[
        tuple[float, float],
        PhysicalField(description="Semi-axes along the rotated x and y.", unit="m"),
    ]
    rotation: Annotated[
        float,
        PhysicalField(description="Counterclockwise rotation.", unit="rad"),
    ] = 0.0

    @field_validator("semi_axes")
    @classmethod
    def positive_axes(cls, value: tuple[float, float]) -> tuple[float, float]:
        if min(value) <= 0:
            raise ValueError("Semi-axes must be positive.")
        return value

    def contains(self, points: np.ndarray) -> np.ndarray:
        offset = np.asarray(points) - np.asarray(self.centre)
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        x = c * offset[:, 0] + s * offset[:, 1]
        y = -s * offset[:, 0] + c * offset[:, 1]
        a, b = self.semi_axes
        return (x / a) ** 2 + (y / b) ** 2 <= 1.0

    def outline(self, n: int = 64) -> np.ndarray:
        t = np.linspace(0, 2 * math.pi, n, endpoint=False)
        a, b = self.semi_axes
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        x, y = a * np.cos(t), b * np.sin(t)
        return np.asarray(self.centre) + np.column_stack((c * x - s * y, s * x + c * y))


class PolygonRegion(_RegionBase):
    kind: Literal["polygon"] = "polygon"
    vertices: Annotated[
        list[tuple[float, float]],
        PhysicalField(min_length=3, description="Polygon corners in order.", unit="m"),
    ]

    def contains(self, points: np.ndarray) -> np.ndarray:
        # even-odd ray casting
        points = np.asarray(points)
        x, y = points[:, 0], points[:, 1]
        corners = np.asarray(self.vertices)
        inside = np.zeros(len(points), dtype=bool)
        for (x0, y0), (x1, y1) in zip(corners, np.roll(corners, -1, axis=0)):
            crosses = (y0 > y) != (y1 > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                x_cross = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            inside ^= crosses & (x < x_cross)
        return inside

    def outline(self, n: int = 64) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)


Region = Annotated[
    Union[CircleRegion, EllipseRegion, PolygonRegion], Field(discriminator="kind")
]


class PhantomSpec(BaseModel):
    """A piecewise-constant conductivity phantom.

    Regions are painted in order onto the background, so a later region
    overwrites an earlier one where they overlap.
    """

    model_config = ConfigDict(frozen=True)

    name: Annotated[str, PhysicalField(description="Phantom name.")]
    version: Annotated[
        int, PhysicalField(ge=1, description="Version of the phantom geometry.")
    ] = 1
    domain_semi_axes: Annotated[
        tuple[float, float],
        PhysicalField(
            description="Semi-axes of the elliptic (or circular) domain.", unit="m"
        ),
    ]
    background: Annotated[
        float,
        PhysicalField(gt=0, description="Background conductivity.", unit="S/m"),
    ]
    epsilon: Annotated[
        float,
        PhysicalField(ge=0, description="Mollification radius.", unit="m"),
    ] = 0.0
    regions: Annotated[
        list[Region], PhysicalField(description="Regions in painting order.")
    ] = []

    @model_validator(mode="after")
    def regions_inside_domain(self) -> "PhantomSpec":
        a, b = self.domain_semi_axes
        if min(a, b) <= 0:
            raise ValueError("Domain semi-axes must be positive.")
        for region in self.regions:
            outline = region.outline()
            if np.any((outline[:, 0] / a) ** 2 + (outline[:, 1] / b) ** 2 > 1 + 1e-9):
                raise ValueError(f"Region {region.name!r} leaves the domain.")
        return self

    @property
    def conductivities(self) -> list[float]:
        return [self.background] + [region.conductivity for region in self.regions]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Conductivity of the unmollified phantom at the `(N, 2)` points."""
        points = np.asarray(points, dtype=float)
        values = np.full(len(points), self.background)
        for region in self.regions:
            values[region.contains(points)] = region.conductivity
        return values
