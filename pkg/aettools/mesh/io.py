"""Reading and writing meshes and mesh-based fields."""

from pathlib import Path
from typing import Optional, Union

import meshio
import numpy as np

from aettools.exceptions import MeshError
from aettools.logger import LOGGER
from aettools.mesh.types import Mesh

__all__ = ("write_mesh", "read_mesh", "write_vtk")

_HEADER = "# aettools mesh v1"
_FLOAT = "%.17g"


def write_mesh(mesh: Mesh, path: Union[str, Path]) -> Path:
    """Write `mesh` as plain text.

    The file holds the characteristic length followed by three sections
    (`vertices`, `triangles`, `boundary_edges`), each introduced by its name
    and row count. Floats are written with 17 significant digits so that
    reading the file back reproduces the mesh exactly.
    """
    path = Path(path)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"{_HEADER}\n")
        handle.write(f"characteristic_h {mesh.characteristic_h!r}\n")
        handle.write(f"vertices {mesh.n_vertices}\n")
        np.savetxt(handle, mesh.vertices, fmt=_FLOAT)
        handle.write(f"triangles {mesh.n_triangles}\n")
        np.savetxt(handle, mesh.triangles, fmt="%d")
        handle.write(f"boundary_edges {len(mesh.boundary_edges)}\n")
        np.savetxt(
            handle,
            np.column_stack((mesh.boundary_edges, mesh.boundary_labels)),
            fmt="%d",
        )
    LOGGER.debug("Wrote mesh to %s.", path)
    return path


def _section(lines: list[str], cursor: int, name: str) -> tuple[list[str], int]:
    try:
        key, count = lines[cursor].split()
    except (IndexError, ValueError) as exc:
        raise MeshError(f"Expected section {name!r} at line {cursor + 1}.") from exc
    if key != name:
        raise MeshError(f"Expected section {name!r}, found {key!r}.")
    n = int(count)
    start = cursor + 1
    if start + n > len(lines):
        raise MeshError(f"Section {name!r} is truncated.")
    return lines[start : start + n], start + n


def read_mesh(path: Union[str, Path]) -> Mesh:
    """Read a mesh written by [`write_mesh`][aettools.mesh.io.write_mesh].

    Raises:
        MeshError: If the file is not a valid mesh file.

    """
    path = Path(path)
    if not path.is_file():
        raise MeshError(f"Mesh file {path} does not exist.")
    lines = [
        line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()
    ]
    if not lines or lines[0] != _HEADER:
        raise MeshError(f"{path} is not an aettools mesh file.")
    key, value = lines[1].split()
    if key != "characteristic_h":
        raise MeshError(f"{path}: missing characteristic_h.")

    vertex_rows, cursor = _section(lines, 2, "vertices")
    triangle_rows, cursor = _section(lines, cursor, "triangles")
    edge_rows, _ = _section(lines, cursor, "boundary_edges")

    vertices = np.loadtxt(vertex_rows, dtype=float, ndmin=2)
    triangles = np.loadtxt(triangle_rows, dtype=np.int64, ndmin=2)
    edges = np.loadtxt(edge_rows, dtype=np.int64, ndmin=2).reshape(-1, 3)
    return Mesh(vertices, triangles, edges[:, :2], edges[:, 2], float(value))


def write_vtk(
    mesh: Mesh,
    path: Union[str, Path],
    point_data: Optional[dict[str, np.ndarray]] = None,
    cell_data: Optional[dict[str, np.ndarray]] = None,
) -> Path:
    """Export `mesh` and optional nodal/per-triangle data as legacy ASCII VTK."""
    path = Path(path)
    points = np.column_stack((mesh.vertices, np.zeros(mesh.n_vertices)))
    vtk_mesh = meshio.Mesh(points=points, cells=[("triangle", np.asarray(mesh.triangles))])

    for name, values in (point_data or {}).items():
        values = np.asarray(values, dtype=float)
        if values.shape[0] != mesh.n_vertices:
            raise MeshError(
                f"point_data[{name!r}] has {values.shape[0]} values for "
                f"{mesh.n_vertices} vertices."
            )
        vtk_mesh.point_data[name] = values
    for name, values in (cell_data or {}).items():
        values = np.asarray(values, dtype=float)
        if values.shape[0] != mesh.n_triangles:
            raise MeshError(
                f"cell_data[{name!r}] has {values.shape[0]} values for "
                f"{mesh.n_triangles} triangles."
            )
        vtk_mesh.cell_data[name] = [values]

    meshio.write(path, vtk_mesh, file_format="vtk", binary=False)
    LOGGER.debug(
        "Wrote VTK file %s (point data: %s, cell data: %s).",
        path,
        sorted(point_data or {}),
        sorted(cell_data or {}),
    )
    return path
