from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional

import numpy as np

from aettools.exceptions import MeshError

__all__ = (
    "LabelKind",
    "BoundaryLabel",
    "GAP_CODE",
    "DIRICHLET_CODE",
    "Mesh",
    "Submesh",
)

GAP_CODE = 0
"""Integer code of boundary edges lying between electrodes."""

DIRICHLET_CODE = -1
"""Integer code of boundary edges carrying prescribed potentials."""


class LabelKind(Enum):
    """Kind of a boundary edge

    - `electrode`: the edge lies under electrode `l`.
    - `gap`: the edge lies between electrodes (insulated).
    - `dirichlet`: the potential is prescribed on the edge.

    """

    ELECTRODE = "electrode"
    GAP = "gap"
    DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class BoundaryLabel:
    """Label of a boundary edge.

    Labels are stored on a [`Mesh`][aettools.mesh.types.Mesh] as integer
    codes: `l >= 1` for electrode `l`, `0` for a gap and `-1` for a
    Dirichlet edge.
    """

    kind: LabelKind
    index: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind is LabelKind.ELECTRODE:
            if self.index is None or self.index < 1:
                raise ValueError("Electrode labels need an index l >= 1.")
        elif self.index is not None:
            raise ValueError(f"{self.kind.value} labels carry no index.")

    @property
    def code(self) -> int:
        if self.kind is LabelKind.ELECTRODE:
            return int(self.index)  # type: ignore[arg-type]
        return GAP_CODE if self.kind is LabelKind.GAP else DIRICHLET_CODE

    @classmethod
    def from_code(cls, code: int) -> "BoundaryLabel":
        if code >= 1:
            return cls(LabelKind.ELECTRODE, int(code))
        if code == GAP_CODE:
            return cls(LabelKind.GAP)
        if code == DIRICHLET_CODE:
            return cls(LabelKind.DIRICHLET)
        raise ValueError(f"Unknown boundary label code {code}.")

    def __str__(self) -> str:
        if self.kind is LabelKind.ELECTRODE:
            return f"Electrode({self.index})"
        return self.kind.value


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Mesh:
    """A conforming triangulation of a planar domain.

    Arrays are copied on construction and made read-only, so a mesh can be
    shared freely between threads. Geometric quantities are computed lazily
    and cached.

    Attributes:
        vertices: `(N, 2)` coordinates in meters.
        triangles: `(T, 3)` vertex indices, counterclockwise.
        boundary_edges: `(B, 2)` vertex indices, oriented so that the domain
            lies to the left.
        boundary_labels: `(B,)` integer label codes (see
            [`BoundaryLabel`][aettools.mesh.types.BoundaryLabel]).
        characteristic_h: Target edge length the mesh was generated with.

    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_labels: np.ndarray
    characteristic_h: float

    def __post_init__(self) -> None:
        vertices = np.array(self.vertices, dtype=float)
        triangles = np.array(self.triangles, dtype=np.int64)
        edges = np.array(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        labels = np.array(self.boundary_labels, dtype=np.int64).reshape(-1)

        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise MeshError(f"vertices must have shape (N, 2), got {vertices.shape}.")
        if triangles.ndim != 2 or triangles.shape[1] != 3 or len(triangles) == 0:
            raise MeshError(
                f"triangles must have shape (T, 3) with T > 0, got {triangles.shape}."
            )
        if len(edges) != len(labels):
            raise MeshError("Every boundary edge needs exactly one label.")
        if not np.all(np.isfinite(vertices)):
            raise MeshError("Vertex coordinates must be finite.")
        for name, index in (("triangles", triangles), ("boundary_edges", edges)):
            if index.size and (index.min() < 0 or index.max() >= len(vertices)):
                raise MeshError(f"{name} reference vertices that do not exist.")
        if np.any(labels < DIRICHLET_CODE):
            raise MeshError("Boundary label codes must be >= -1.")

        object.__setattr__(self, "vertices", _readonly(vertices))
        object.__setattr__(self, "triangles", _readonly(triangles))
        object.__setattr__(self, "boundary_edges", _readonly(edges))
        object.__setattr__(self, "boundary_labels", _readonly(labels))
        object.__setattr__(self, "characteristic_h", float(self.characteristic_h))

        if np.any(self.signed_double_areas <= 0):
            bad = int(np.sum(self.signed_double_areas <= 0))
            raise MeshError(f"{bad} triangles have non-positive signed area.")

    def __repr__(self) -> str:
        return (
            f"Mesh(vertices={self.n_vertices}, triangles={self.n_triangles}, "
            f"boundary_edges={len(self.boundary_edges)}, "
            f"electrodes={self.electrode_count}, h={self.characteristic_h:.4g})"
        )

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def electrode_count(self) -> int:
        return int(self.boundary_labels.max(initial=0))

    @cached_property
    def signed_double_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return _readonly(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def areas(self) -> np.ndarray:
        return _readonly(0.5 * self.signed_double_areas)

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    @cached_property
    def centroids(self) -> np.ndarray:
        return _readonly(self.vertices[self.triangles].mean(axis=1))

    @cached_property
    def gradients(self) -> np.ndarray:
        """`(T, 3, 2)` gradients of the three barycentric basis functions."""
        p = self.vertices[self.triangles]
        x, y = p[..., 0], p[..., 1]
        grads = np.empty((self.n_triangles, 3, 2))
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            grads[:, i, 0] = y[:, j] - y[:, k]
            grads[:, i, 1] = x[:, k] - x[:, j]
        grads /= self.signed_double_areas[:, None, None]
        return _readonly(grads)

    @cached_property
    def edges(self) -> np.ndarray:
        """`(E, 2)` unique undirected edges, each sorted ascending."""
        all_edges = np.sort(
            self.triangles[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2), axis=1
        )
        return _readonly(np.unique(all_edges, axis=0))

    @cached_property
    def boundary_nodes(self) -> np.ndarray:
        return _readonly(np.unique(self.boundary_edges))

    @cached_property
    def boundary_edge_lengths(self) -> np.ndarray:
        p = self.vertices[self.boundary_edges]
        return _readonly(np.linalg.norm(p[:, 1] - p[:, 0], axis=1))

    def edges_labelled(self, code: int) -> np.ndarray:
        """Indices of the boundary edges carrying the label `code`."""
        return np.flatnonzero(self.boundary_labels == code)

    def electrode_edges(self, l: int) -> np.ndarray:
        return self.edges_labelled(l)

    @cached_property
    def dirichlet_nodes(self) -> np.ndarray:
        edges = self.boundary_edges[self.boundary_labels == DIRICHLET_CODE]
        return _readonly(np.unique(edges))

    def label(self, edge: int) -> BoundaryLabel:
        return BoundaryLabel.from_code(int(self.boundary_labels[edge]))

    def with_boundary_labels(self, labels: np.ndarray) -> "Mesh":
        return Mesh(
            self.vertices,
            self.triangles,
            self.boundary_edges,
            labels,
            self.characteristic_h,
        )

    def validate_topology(self) -> None:
        """Check that the boundary edges are exactly the edges owned by one
        triangle, that they form closed loops, and that every electrode is a
        connected run of edges.

        Raises:
            MeshError: On the first violated condition.

        """
        directed = self.triangles[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2)
        undirected = np.sort(directed, axis=1)
        unique, inverse, counts = np.unique(
            undirected, axis=0, return_inverse=True, return_counts=True
        )
        if np.any(counts > 2):
            raise MeshError("Some edges are shared by more than two triangles.")
        owned_once = directed[counts[inverse.reshape(-1)] == 1]

        expected = {tuple(edge) for edge in owned_once.tolist()}
        actual = {tuple(edge) for edge in self.boundary_edges.tolist()}
        if len(actual) != len(self.boundary_edges):
            raise MeshError("Duplicate boundary edges.")
        if expected != actual:
            raise MeshError(
                "Boundary edges do not match the edges owned by exactly one "
                "triangle (with matching orientation)."
            )

        n = self.n_vertices
        out_degree = np.bincount(self.boundary_edges[:, 0], minlength=n)
        in_degree = np.bincount(self.boundary_edges[:, 1], minlength=n)
        if np.any(out_degree != in_degree):
            raise MeshError("Boundary edges do not form closed loops.")

        for l in range(1, self.electrode_count + 1):
            edges = self.boundary_edges[self.electrode_edges(l)]
            if len(edges) == 0:
                raise MeshError(f"Electrode {l} has no boundary edges.")
            starts = set(edges[:, 0].tolist()) - set(edges[:, 1].tolist())
            if len(starts) > 1:
                raise MeshError(f"Electrode {l} is not connected along the boundary.")


@dataclass(frozen=True, eq=False)
class Submesh:
    """A mesh cut out of a parent mesh.

    Attributes:
        mesh: The extracted mesh.
        parent: The mesh it was cut from.
        vertex_map: `vertex_map[i]` is the parent index of vertex `i`.
        triangle_map: `triangle_map[t]` is the parent index of triangle `t`.

    """

    mesh: Mesh
    parent: Mesh
    vertex_map: np.ndarray
    triangle_map: np.ndarray

    @property
    def boundary_parent_nodes(self) -> np.ndarray:
        """Parent indices of the nodes on the submesh boundary."""
        return self.vertex_map[self.mesh.boundary_nodes]
