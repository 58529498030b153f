import numpy as np
from scipy.spatial import cKDTree

from aettools.exceptions import MeshError
from aettools.fem.fields import CellField, ScalarField
from aettools.logger import LOGGER
from aettools.mesh.types import DIRICHLET_CODE, Mesh, Submesh

__all__ = (
    "boundary_distance_field",
    "extract_interior_submesh",
    "subcell_points",
    "locate_points",
    "transfer_cells",
    "electrode_endpoints",
)

_CANDIDATES = 8
_LOCATE_CANDIDATES = 12
_BARYCENTRIC_TOL = 1e-10

_SUBCELL = np.array(
    [
        [2 / 3, 1 / 6, 1 / 6],
        [1 / 6, 2 / 3, 1 / 6],
        [1 / 6, 1 / 6, 2 / 3],
        [1 / 3, 1 / 3, 1 / 3],
    ]
)


def subcell_points(mesh: Mesh) -> np.ndarray:
    """`(T, 4, 2)` centroids of the four midpoint sub-triangles of every triangle."""
    return np.einsum("qi,tid->tqd", _SUBCELL, mesh.vertices[mesh.triangles])


def _segment_distances(
    points: np.ndarray, starts: np.ndarray, ends: np.ndarray
) -> np.ndarray:
    """Distance from each of `points` (N, 2) to each of the segments
    `starts[n, k] -> ends[n, k]` (N, K, 2); returns (N, K)."""
    direction = ends - starts
    length2 = np.einsum("nkd,nkd->nk", direction, direction)
    offset = points[:, None, :] - starts
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.einsum("nkd,nkd->nk", offset, direction) / length2
    t = np.clip(np.nan_to_num(t), 0.0, 1.0)
    nearest = starts + t[..., None] * direction
    return np.linalg.norm(points[:, None, :] - nearest, axis=-1)


def boundary_distance_field(mesh: Mesh) -> ScalarField:
    """Euclidean distance of every vertex to the polygonal boundary.

    Candidate boundary segments are the edges incident to the nearest
    boundary vertices; boundary vertices get exactly zero.
    """
    edges = mesh.boundary_edges
    nodes = mesh.boundary_nodes
    points = mesh.vertices

    incident = [[] for _ in range(mesh.n_vertices)]
    for e, (i, j) in enumerate(edges.tolist()):
        incident[i].append(e)
        incident[j].append(e)
    degree = max(len(incident[n]) for n in nodes)
    # pad with the first incident edge
    incidence = np.array(
        [incident[n] + [incident[n][0]] * (degree - len(incident[n])) for n in nodes]
    )

    k = min(_CANDIDATES, len(nodes))
    _, nearest = cKDTree(points[nodes]).query(points, k=k)
    nearest = nearest.reshape(len(points), k)
    candidate_edges = incidence[nearest].reshape(len(points), -1)

    distances = _segment_distances(
        points,
        points[edges[candidate_edges, 0]],
        points[edges[candidate_edges, 1]],
    ).min(axis=1)
    distances[nodes] = 0.0
    return ScalarField(mesh, distances)


def extract_interior_submesh(mesh: Mesh, d: float) -> Submesh:
    """Cut out the triangles whose vertices all lie farther than `d` from the
    boundary.

    The new boundary is labelled Dirichlet throughout. With `d = 0` the whole
    mesh is kept and only relabelled.

    Raises:
        MeshError: If `d` is negative or no triangle survives.

    """
    if d < 0:
        raise MeshError(f"Interior distance must be non-negative, got {d}.")

    if d == 0:
        keep = np.ones(mesh.n_triangles, dtype=bool)
    else:
        distance = boundary_distance_field(mesh).values
        keep = np.all(distance[mesh.triangles] > d, axis=1)
    if not np.any(keep):
        raise MeshError(f"No triangle lies farther than d={d} from the boundary.")

    triangle_map = np.flatnonzero(keep)
    kept = mesh.triangles[triangle_map]
    vertex_map = np.unique(kept)
    triangles = np.searchsorted(vertex_map, kept)

    directed = triangles[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2)
    _, inverse, counts = np.unique(
        np.sort(directed, axis=1), axis=0, return_inverse=True, return_counts=True
    )
    boundary_edges = directed[counts[inverse.reshape(-1)] == 1]
    labels = np.full(len(boundary_edges), DIRICHLET_CODE)

    submesh = Mesh(
        mesh.vertices[vertex_map],
        triangles,
        boundary_edges,
        labels,
        mesh.characteristic_h,
    )
    submesh.validate_topology()
    LOGGER.info(
        "Extracted interior submesh at d=%.4g: %d of %d triangles, area %.6g.",
        d,
        submesh.n_triangles,
        mesh.n_triangles,
        submesh.total_area,
    )
    return Submesh(
        mesh=submesh, parent=mesh, vertex_map=vertex_map, triangle_map=triangle_map
    )


def _cross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def locate_points(mesh: Mesh, points: np.ndarray) -> np.ndarray:
    """Index of a triangle of `mesh` containing each of the `(P, 2)` points.

    Candidates are the triangles with the nearest centroids. A point outside
    all of them (for instance just outside a coarser polygonal boundary) is
    assigned the triangle with the nearest centroid.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    k = min(_LOCATE_CANDIDATES, mesh.n_triangles)
    _, candidates = cKDTree(mesh.centroids).query(points, k=k)
    candidates = candidates.reshape(len(points), k)

    a, b, c = np.moveaxis(mesh.vertices[mesh.triangles[candidates]], 2, 0)
    p = points[:, None, :]
    double_area = _cross(b - a, c - a)
    first = _cross(b - p, c - p) / double_area
    second = _cross(c - p, a - p) / double_area
    barycentric = np.stack((first, second, 1.0 - first - second), axis=-1)
    inside = barycentric.min(axis=-1) >= -_BARYCENTRIC_TOL

    rows = np.arange(len(points))
    hit = np.argmax(inside, axis=1)
    found = inside[rows, hit]
    if not np.all(found):
        LOGGER.debug(
            "%d of %d points lie outside the mesh; using the nearest triangle.",
            int((~found).sum()),
            len(points),
        )
    return np.where(found, candidates[rows, hit], candidates[:, 0])


def transfer_cells(field: CellField, target: Mesh) -> CellField:
    """Carry a per-triangle field onto the triangles of another mesh of the
    same domain.

    Every target triangle receives the mean of `field` at its four subcell
    points, which averages the finer cells it overlaps.
    """
    if target is field.mesh:
        return field
    points = subcell_points(target)
    owners = locate_points(field.mesh, points.reshape(-1, 2))
    values = np.asarray(field.values)[owners].reshape(points.shape[:2])
    return CellField(target, values.mean(axis=1))


def electrode_endpoints(mesh: Mesh) -> np.ndarray:
    """`(2L, 2)` coordinates of the first and last vertex of every electrode,
    in electrode order. Electrodes covering a closed loop have no endpoints
    and are skipped."""
    endpoints = []
    for l in range(1, mesh.electrode_count + 1):
        edges = mesh.boundary_edges[mesh.electrode_edges(l)]
        starts = np.setdiff1d(edges[:, 0], edges[:, 1])
        ends = np.setdiff1d(edges[:, 1], edges[:, 0])
        endpoints.extend(mesh.vertices[np.concatenate((starts, ends))])
    return np.array(endpoints, dtype=float).reshape(-1, 2)
