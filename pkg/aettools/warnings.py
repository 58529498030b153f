"""This submodule implements the advisory warnings that can be emitted
while simulating or reconstructing.

"""

from typing import Optional

__all__ = (
    "AetWarning",
    "ConductivityClamped",
    "MollifierBelowResolution",
    "BoundaryTargetNotReached",
    "InnerSolveInaccurate",
    "TriangleCountApproximate",
)


class AetWarning(Warning):
    """Base Warning for the `aettools` package"""

    def __init__(
        self, detail: Optional[str] = None, title: Optional[str] = None, *args
    ) -> None:
        detail = detail if detail else self.__doc__
        super().__init__(detail, *args)
        self.detail = detail
        self.title = title if title else self.__class__.__name__

    def __repr__(self) -> str:
        attrs = {"detail": self.detail, "title": self.title}
        return "<{:s}({:s})>".format(
            self.__class__.__name__,
            " ".join(
                [
                    f"{attr}={value!r}"
                    for attr, value in attrs.items()
                    if value is not None
                ]
            ),
        )

    def __str__(self) -> str:
        return self.detail if self.detail is not None else ""


class ConductivityClamped(AetWarning):
    """An update drove the conductivity below the positivity floor at some nodes;
    those nodes have been clamped to the floor."""


class MollifierBelowResolution(AetWarning):
    """The mollification radius is smaller than the mesh resolution; the field is
    passed through unchanged."""


class BoundaryTargetNotReached(AetWarning):
    """The electrode-voltage error target was not reached before the iteration cap
    of the first phase; continuing with the last iterate."""


class InnerSolveInaccurate(AetWarning):
    """The regularized step equation was solved less accurately than requested."""


class TriangleCountApproximate(AetWarning):
    """The generated mesh deviates noticeably from the requested triangle count."""
