"""Mesh generators for the computational domains.

Elliptic domains are meshed by sampling the boundary curve at arclength
spacing `h` (with breakpoints placed exactly at the electrode endpoints),
filling the interior with scaled copies of the boundary ring, and taking
the Delaunay triangulation of the resulting point cloud.
"""

import math
import warnings

import numpy as np
from scipy.spatial import Delaunay

from aettools.config import CONFIG
from aettools.exceptions import MeshError
from aettools.logger import LOGGER
from aettools.mesh.types import DIRICHLET_CODE, GAP_CODE, Mesh
from aettools.models.electrodes import ElectrodeLayout
from aettools.models.experiment import MeshConfig
from aettools.warnings import TriangleCountApproximate

__all__ = (
    "generate_disk_mesh",
    "generate_ellipse_mesh",
    "generate_rectangle_mesh",
    "generate_mesh",
    "triangle_count_for",
    "EllipseBoundary",
)

_CURVE_SAMPLES = 20_000


def triangle_count_for(area: float, n_triangles: int) -> float:
    """Edge length `h` for which the generators produce about `n_triangles`
    triangles on a domain of the given `area`."""
    if area <= 0 or n_triangles <= 0:
        raise MeshError("Area and triangle count must be positive.")
    return math.sqrt(2.0 * area / n_triangles)


def _check_budget(area: float, h: float) -> None:
    estimate = 2.0 * area / h**2
    if estimate > CONFIG.max_triangles:
        raise MeshError(
            f"h={h:.3g} would produce about {estimate:.0f} triangles, above the "
            f"configured cap of {CONFIG.max_triangles} (AET_MAX_TRIANGLES)."
        )


class EllipseBoundary:
    """Arclength parametrization of the ellipse `(a cos t, b sin t)`.

    Arclength `s` is measured counterclockwise from `(a, 0)`. For a circle
    the parametrization is exact; otherwise it is tabulated on a fine grid.
    """

    def __init__(self, a: float, b: float) -> None:
        self.a = float(a)
        self.b = float(b)
        if self.a == self.b:
            self._t = None
            self._s = None
            self.perimeter = 2 * math.pi * self.a
        else:
            t = np.linspace(0, 2 * math.pi, _CURVE_SAMPLES + 1)
            xy = np.column_stack((self.a * np.cos(t), self.b * np.sin(t)))
            chords = np.linalg.norm(np.diff(xy, axis=0), axis=1)
            s = np.concatenate(([0.0], np.cumsum(chords)))
            self._t = t
            self._s = s
            self.perimeter = float(s[-1])

    def parameter(self, s: np.ndarray) -> np.ndarray:
        s = np.mod(np.asarray(s, dtype=float), self.perimeter)
        if self._t is None:
            return s / self.a
        return np.interp(s, self._s, self._t)

    def point(self, s: np.ndarray) -> np.ndarray:
        t = self.parameter(s)
        return np.column_stack((self.a * np.cos(t), self.b * np.sin(t)))

    def arclength_of_angle(self, theta: float) -> float:
        """Arclength position of the boundary point at polar angle `theta`.

        Whole turns are kept, so increasing angles map to increasing
        positions beyond one perimeter.
        """
        turns = math.floor(theta / (2 * math.pi))
        rest = theta - 2 * math.pi * turns
        t = math.atan2(self.a * math.sin(rest), self.b * math.cos(rest)) % (2 * math.pi)
        if self._t is None:
            s = self.a * t
        else:
            s = float(np.interp(t, self._t, self._s))
        return s + turns * self.perimeter


def _boundary_samples(
    curve: EllipseBoundary, h: float, layout: ElectrodeLayout
) -> tuple[np.ndarray, np.ndarray]:
    """Arclength positions of the boundary vertices and the label of the edge
    starting at each of them."""
    period = curve.perimeter
    tol = 1e-12 * period
    arcs = [
        (curve.arclength_of_angle(start), curve.arclength_of_angle(end))
        for start, end in layout.arcs
    ]

    breaks = np.sort(np.mod([s for arc in arcs for s in arc], period))
    breaks = breaks[np.concatenate(([True], np.diff(breaks) > tol))]
    if len(breaks) > 1 and breaks[-1] - breaks[0] > period - tol:
        breaks = breaks[:-1]

    positions = []
    labels = []
    for i, start in enumerate(breaks):
        end = breaks[i + 1] if i + 1 < len(breaks) else breaks[0] + period
        n = max(1, math.ceil((end - start) / h - 1e-9))
        local = start + (end - start) * np.arange(n) / n
        midpoints = local + 0.5 * (end - start) / n
        positions.append(local)
        labels.append(_electrode_at(midpoints, arcs, period))

    return np.concatenate(positions), np.concatenate(labels)


def _electrode_at(
    s: np.ndarray, arcs: list[tuple[float, float]], period: float
) -> np.ndarray:
    labels = np.full(len(s), GAP_CODE, dtype=np.int64)
    for l, (start, end) in enumerate(arcs, start=1):
        inside = np.mod(s - start, period) < (end - start)
        labels[inside & (labels == GAP_CODE)] = l
    return labels


def _interior_rings(curve: EllipseBoundary, h: float) -> np.ndarray:
    rings = []
    minor = min(curve.a, curve.b)
    k = 1
    while True:
        scale = 1.0 - k * h / minor
        if scale * minor <= 0.5 * h:
            break
        n = max(6, math.ceil(scale * curve.perimeter / h))
        # stagger consecutive rings for better shaped triangles
        s = (np.arange(n) + 0.5 * (k % 2)) * curve.perimeter / n
        rings.append(scale * curve.point(s))
        k += 1
    rings.append(np.zeros((1, 2)))
    return np.vstack(rings)


def _delaunay_mesh(
    points: np.ndarray,
    n_boundary: int,
    boundary_labels: np.ndarray,
    h: float,
) -> Mesh:
    triangles = Delaunay(points).simplices.astype(np.int64)

    p = points[triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    signed = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    flip = signed < 0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]

    index = np.arange(n_boundary)
    boundary_edges = np.column_stack((index, np.roll(index, -1)))
    mesh = Mesh(points, triangles, boundary_edges, boundary_labels, h)
    mesh.validate_topology()
    return mesh


def generate_ellipse_mesh(
    semi_major: float, semi_minor: float, h: float, layout: ElectrodeLayout
) -> Mesh:
    """Mesh the ellipse `(x/a)² + (y/b)² < 1` with `a = semi_major` along x.

    Parameters:
        semi_major: Semi-axis along x (m).
        semi_minor: Semi-axis along y (m).
        h: Target edge length (m).
        layout: Electrode placement; boundary edges are split exactly at
            the electrode endpoints.

    Returns:
        The mesh, with boundary edges labelled by electrode or gap.

    Raises:
        MeshError: If the parameters are invalid or the mesh would exceed the
            configured triangle cap.

    """
    if semi_major <= 0 or semi_minor <= 0:
        raise MeshError("Semi-axes must be positive.")
    if not 0 < h < min(semi_major, semi_minor):
        raise MeshError(f"h={h} must lie in (0, {min(semi_major, semi_minor)}).")
    _check_budget(math.pi * semi_major * semi_minor, h)

    curve = EllipseBoundary(semi_major, semi_minor)
    positions, labels = _boundary_samples(curve, h, layout)
    boundary = curve.point(positions)
    points = np.vstack((boundary, _interior_rings(curve, h)))

    mesh = _delaunay_mesh(points, len(boundary), labels, h)
    LOGGER.info(
        "Meshed ellipse (%.4g m x %.4g m) with h=%.4g: %d vertices, %d triangles, "
        "%d electrodes.",
        semi_major,
        semi_minor,
        h,
        mesh.n_vertices,
        mesh.n_triangles,
        mesh.electrode_count,
    )
    return mesh


def generate_disk_mesh(radius: float, h: float, layout: ElectrodeLayout) -> Mesh:
    """Mesh the disk of the given `radius` centred at the origin; see
    [`generate_ellipse_mesh`][aettools.mesh.generators.generate_ellipse_mesh]."""
    if radius <= 0:
        raise MeshError("Radius must be positive.")
    return generate_ellipse_mesh(radius, radius, h, layout)


def generate_rectangle_mesh(width: float, height: float, h: float) -> Mesh:
    """Structured mesh of `[0, width] x [0, height]`, two triangles per cell,
    with every boundary edge labelled Dirichlet."""
    if width <= 0 or height <= 0 or h <= 0:
        raise MeshError("Rectangle dimensions and h must be positive.")
    _check_budget(width * height, h)

    nx = max(1, math.ceil(width / h - 1e-9))
    ny = max(1, math.ceil(height / h - 1e-9))
    x = np.linspace(0.0, width, nx + 1)
    y = np.linspace(0.0, height, ny + 1)
    xx, yy = np.meshgrid(x, y)
    vertices = np.column_stack((xx.ravel(), yy.ravel()))

    def node(i, j):
        return j * (nx + 1) + i

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    i, j = i.ravel(), j.ravel()
    lower_left, lower_right = node(i, j), node(i + 1, j)
    upper_left, upper_right = node(i, j + 1), node(i + 1, j + 1)
    triangles = np.vstack(
        (
            np.column_stack((lower_left, lower_right, upper_right)),
            np.column_stack((lower_left, upper_right, upper_left)),
        )
    )

    loop = (
        [node(k, 0) for k in range(nx)]
        + [node(nx, k) for k in range(ny)]
        + [node(k, ny) for k in range(nx, 0, -1)]
        + [node(0, k) for k in range(ny, 0, -1)]
    )
    boundary_edges = np.column_stack((loop, np.roll(loop, -1)))
    labels = np.full(len(boundary_edges), DIRICHLET_CODE)

    mesh = Mesh(vertices, triangles, boundary_edges, labels, h)
    LOGGER.info(
        "Meshed rectangle %.4g x %.4g with h=%.4g: %d triangles.",
        width,
        height,
        h,
        mesh.n_triangles,
    )
    return mesh


def generate_mesh(config: MeshConfig, layout: ElectrodeLayout) -> Mesh:
    """Build the mesh described by an experiment's `mesh` section."""
    if config.shape == "disk":
        area = math.pi * config.radius**2
    elif config.shape == "ellipse":
        area = math.pi * config.semi_axes[0] * config.semi_axes[1]
    else:
        area = config.size[0] * config.size[1]

    if config.h is not None:
        h = config.h
    else:
        h = triangle_count_for(area, config.target_triangles)  # type: ignore[arg-type]

    if config.shape == "disk":
        mesh = generate_disk_mesh(config.radius, h, layout)
    elif config.shape == "ellipse":
        mesh = generate_ellipse_mesh(config.semi_axes[0], config.semi_axes[1], h, layout)
    else:
        mesh = generate_rectangle_mesh(config.size[0], config.size[1], h)

    if config.target_triangles is not None:
        deviation = mesh.n_triangles / config.target_triangles - 1.0
        if abs(deviation) > 0.25:
            warnings.warn(
                TriangleCountApproximate(
                    f"Requested about {config.target_triangles} triangles, "
                    f"generated {mesh.n_triangles}."
                )
            )
    return mesh
