from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Union

import numpy as np

from aettools.exceptions import InvalidFieldError

if TYPE_CHECKING:  # pragma: no cover
    from aettools.mesh.types import Mesh, Submesh

__all__ = ("ScalarField", "CellField", "Field")


@dataclass(frozen=True, eq=False)
class _MeshField:
    """Common behaviour of nodal and per-triangle fields.

    Values are copied into a read-only float array on construction and must
    all be finite. Arithmetic is supported between fields of the same kind
    on the same mesh and with scalars.
    """

    mesh: "Mesh"
    values: np.ndarray

    def _expected_size(self) -> int:
        raise NotImplementedError

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float).reshape(-1)
        expected = self._expected_size()
        if values.shape != (expected,):
            raise InvalidFieldError(
                f"{type(self).__name__} needs {expected} values, got {values.size}."
            )
        if not np.all(np.isfinite(values)):
            raise InvalidFieldError(f"{type(self).__name__} has non-finite values.")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return np.asarray(self.values, dtype=dtype)

    def with_values(self, values: np.ndarray):
        return type(self)(self.mesh, values)

    def _operand(self, other) -> Union[np.ndarray, float]:
        if isinstance(other, _MeshField):
            if type(other) is not type(self):
                raise InvalidFieldError(
                    f"Cannot combine {type(self).__name__} with {type(other).__name__}."
                )
            if other.mesh is not self.mesh:
                raise InvalidFieldError("Fields live on different meshes.")
            return other.values
        return float(other)

    def __add__(self, other):
        return self.with_values(self.values + self._operand(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.with_values(self.values - self._operand(other))

    def __rsub__(self, other):
        return self.with_values(self._operand(other) - self.values)

    def __mul__(self, other):
        return self.with_values(self.values * self._operand(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())


@dataclass(frozen=True, eq=False)
class ScalarField(_MeshField):
    """A continuous piecewise-linear function, one value per mesh vertex."""

    def _expected_size(self) -> int:
        return self.mesh.n_vertices

    @classmethod
    def constant(cls, mesh: "Mesh", value: float) -> "ScalarField":
        return cls(mesh, np.full(mesh.n_vertices, float(value)))

    @classmethod
    def zeros(cls, mesh: "Mesh") -> "ScalarField":
        return cls(mesh, np.zeros(mesh.n_vertices))

    @classmethod
    def from_function(
        cls, mesh: "Mesh", func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    ) -> "ScalarField":
        """Nodal interpolant of `func(x, y)`."""
        x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
        return cls(mesh, np.broadcast_to(func(x, y), x.shape))

    def cell_average(self) -> "CellField":
        """Per-triangle arithmetic mean of the three nodal values."""
        return CellField(self.mesh, self.values[self.mesh.triangles].mean(axis=1))

    def restrict(self, submesh: "Submesh") -> "ScalarField":
        if submesh.parent is not self.mesh:
            raise InvalidFieldError("Field does not live on the submesh's parent.")
        return ScalarField(submesh.mesh, self.values[submesh.vertex_map])


@dataclass(frozen=True, eq=False)
class CellField(_MeshField):
    """A piecewise-constant function, one value per triangle."""

    def _expected_size(self) -> int:
        return self.mesh.n_triangles

    @classmethod
    def constant(cls, mesh: "Mesh", value: float) -> "CellField":
        return cls(mesh, np.full(mesh.n_triangles, float(value)))

    @classmethod
    def zeros(cls, mesh: "Mesh") -> "CellField":
        return cls(mesh, np.zeros(mesh.n_triangles))

    def restrict(self, submesh: "Submesh") -> "CellField":
        if submesh.parent is not self.mesh:
            raise InvalidFieldError("Field does not live on the submesh's parent.")
        return CellField(submesh.mesh, self.values[submesh.triangle_map])


Field = Union[ScalarField, CellField]
