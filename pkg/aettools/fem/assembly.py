"""Assembly of P1 finite-element operators on triangular meshes.

Element contributions are accumulated in COO form and summed on conversion
to CSR, so duplicate entries add up.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Union

import numpy as np
import scipy.sparse as sp

from aettools.exceptions import InvalidFieldError
from aettools.fem.fields import CellField, ScalarField

if TYPE_CHECKING:  # pragma: no cover
    from aettools.mesh.types import Mesh

__all__ = (
    "ConductanceProfile",
    "RobinBlocks",
    "assemble_stiffness",
    "assemble_weighted_stiffness",
    "assemble_mass",
    "assemble_robin_electrode",
    "assemble_cell_load",
    "cell_coefficient",
    "electrode_arclength",
)

ConductanceProfile = Callable[[np.ndarray], np.ndarray]
"""Electrode conductance as a function of the arclength `x` measured from the
electrode centre (m)."""

# composite 2-point Gauss-Legendre on equal sub-intervals of each edge
_SUBINTERVALS = 3
_GAUSS = 0.5 * np.array([1 - 1 / np.sqrt(3), 1 + 1 / np.sqrt(3)])
_EDGE_POINTS = (
    (np.arange(_SUBINTERVALS)[:, None] + _GAUSS[None, :]) / _SUBINTERVALS
).ravel()
_EDGE_WEIGHTS = np.full(_EDGE_POINTS.size, 0.5 / _SUBINTERVALS)

_MASS_REFERENCE = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


def cell_coefficient(
    mesh: "Mesh", coefficient: Union[ScalarField, CellField, float], name: str = "σ"
) -> np.ndarray:
    """Per-triangle values of a coefficient given as a nodal field, a cell
    field or a constant. Nodal fields are averaged over each triangle."""
    if isinstance(coefficient, ScalarField):
        if coefficient.mesh is not mesh:
            raise InvalidFieldError(f"{name} lives on a different mesh.")
        return coefficient.cell_average().values
    if isinstance(coefficient, CellField):
        if coefficient.mesh is not mesh:
            raise InvalidFieldError(f"{name} lives on a different mesh.")
        return np.asarray(coefficient.values)
    return np.full(mesh.n_triangles, float(coefficient))


def _scatter(mesh: "Mesh", local: np.ndarray, size: int) -> sp.csr_matrix:
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(size, size)).tocsr()


def assemble_stiffness(
    mesh: "Mesh", sigma: Union[ScalarField, CellField, float]
) -> sp.csr_matrix:
    """Stiffness matrix `K_ij = ∫ σ ∇w_i · ∇w_j` with σ averaged per triangle.

    Raises:
        InvalidFieldError: If σ is not strictly positive.

    """
    if isinstance(sigma, (ScalarField, CellField)):
        if sigma.min() <= 0:
            raise InvalidFieldError(
                f"Conductivity must be positive, minimum is {sigma.min():.3e}."
            )
    elif float(sigma) <= 0:
        raise InvalidFieldError(f"Conductivity must be positive, got {sigma}.")
    return assemble_weighted_stiffness(mesh, cell_coefficient(mesh, sigma))


def assemble_weighted_stiffness(mesh: "Mesh", weights: np.ndarray) -> sp.csr_matrix:
    """Stiffness matrix with arbitrary (possibly signed) per-triangle weights."""
    grads = mesh.gradients
    local = np.einsum("tid,tjd->tij", grads, grads)
    local *= (weights * mesh.areas)[:, None, None]
    return _scatter(mesh, local, mesh.n_vertices)


def assemble_mass(mesh: "Mesh") -> sp.csr_matrix:
    """Consistent P1 mass matrix `M_ij = ∫ w_i w_j`."""
    local = mesh.areas[:, None, None] * _MASS_REFERENCE[None, :, :]
    return _scatter(mesh, local, mesh.n_vertices)


def assemble_cell_load(mesh: "Mesh", values: np.ndarray) -> np.ndarray:
    """Load vector `b_j = ∫ f w_j` of a per-triangle constant `f`."""
    contributions = np.repeat((np.asarray(values) * mesh.areas / 3.0)[:, None], 3, axis=1)
    return np.bincount(
        mesh.triangles.ravel(), weights=contributions.ravel(), minlength=mesh.n_vertices
    )


@dataclass(frozen=True)
class RobinBlocks:
    """Electrode coupling blocks of the bilinear form
    `Σ_l ∫_{e_l} ζ (u − U_l)(w − W_l)`.

    Attributes:
        uu: `(N, N)` block `Σ_l ∫ ζ w_i w_j`.
        uU: `(N, L)` block `−∫_{e_l} ζ w_i`.
        UU: `(L, L)` diagonal block `∫_{e_l} ζ`.

    """

    uu: sp.csr_matrix
    uU: sp.csr_matrix
    UU: sp.csr_matrix

    def system_matrix(self, stiffness: sp.spmatrix) -> sp.csr_matrix:
        """The full symmetric matrix over the unknowns `(u, U)`."""
        return sp.bmat(
            [[stiffness + self.uu, self.uU], [self.uU.T, self.UU]], format="csr"
        )


def electrode_arclength(mesh: "Mesh", l: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Edges of electrode `l` in boundary order, the arclength at their start
    vertices measured from the electrode centre, and the electrode length."""
    edge_ids = mesh.electrode_edges(l)
    if len(edge_ids) == 0:
        raise InvalidFieldError(f"Mesh has no edges under electrode {l}.")
    edges = mesh.boundary_edges[edge_ids]
    successor = {int(i): k for k, i in enumerate(edges[:, 0])}
    ends = set(edges[:, 1].tolist())
    heads = [k for k, i in enumerate(edges[:, 0]) if int(i) not in ends]
    current = heads[0] if heads else 0

    order = []
    for _ in range(len(edges)):
        order.append(current)
        current = successor.get(int(edges[current, 1]), -1)
        if current < 0 or current == order[0]:
            break
    order = np.array(order)

    lengths = mesh.boundary_edge_lengths[edge_ids[order]]
    starts = np.concatenate(([0.0], np.cumsum(lengths)[:-1]))
    total = float(lengths.sum())
    return edge_ids[order], starts - 0.5 * total, total


def assemble_robin_electrode(
    mesh: "Mesh",
    zeta: Union[ConductanceProfile, Sequence[ConductanceProfile]],
) -> RobinBlocks:
    """Boundary coupling blocks of the electrode model.

    Parameters:
        mesh: Mesh with electrode-labelled boundary edges.
        zeta: Electrode conductance profile, either shared by all electrodes
            or one per electrode. Profiles are evaluated at the arclength
            measured from each electrode's centre.

    Returns:
        The three coupling blocks.

    Raises:
        InvalidFieldError: If ζ is negative anywhere it is sampled.

    """
    n, count = mesh.n_vertices, mesh.electrode_count
    profiles = list(zeta) if isinstance(zeta, Sequence) else [zeta] * count
    if len(profiles) != count:
        raise InvalidFieldError(
            f"{len(profiles)} conductance profiles for {count} electrodes."
        )
    if count == 0:
        empty = sp.csr_matrix((n, 0))
        return RobinBlocks(uu=sp.csr_matrix((n, n)), uU=empty, UU=sp.csr_matrix((0, 0)))

    uu_rows, uu_cols, uu_vals = [], [], []
    uU_rows, uU_cols, uU_vals = [], [], []
    UU = np.zeros(count)

    phi = np.column_stack((1.0 - _EDGE_POINTS, _EDGE_POINTS))
    for l in range(1, count + 1):
        edge_ids, starts, _ = electrode_arclength(mesh, l)
        lengths = mesh.boundary_edge_lengths[edge_ids]
        x = starts[:, None] + lengths[:, None] * _EDGE_POINTS[None, :]
        values = np.broadcast_to(np.asarray(profiles[l - 1](x), dtype=float), x.shape)
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise InvalidFieldError(f"Electrode conductance of electrode {l} is negative.")

        weighted = values * _EDGE_WEIGHTS[None, :] * lengths[:, None]
        nodes = mesh.boundary_edges[edge_ids]

        local_uu = np.einsum("eq,qa,qb->eab", weighted, phi, phi)
        uu_rows.append(np.repeat(nodes, 2, axis=1).ravel())
        uu_cols.append(np.tile(nodes, (1, 2)).ravel())
        uu_vals.append(local_uu.ravel())

        local_uU = weighted @ phi
        uU_rows.append(nodes.ravel())
        uU_cols.append(np.full(nodes.size, l - 1))
        uU_vals.append(-local_uU.ravel())

        UU[l - 1] = weighted.sum()

    uu = sp.coo_matrix(
        (np.concatenate(uu_vals), (np.concatenate(uu_rows), np.concatenate(uu_cols))),
        shape=(n, n),
    ).tocsr()
    uU = sp.coo_matrix(
        (np.concatenate(uU_vals), (np.concatenate(uU_rows), np.concatenate(uU_cols))),
        shape=(n, count),
    ).tocsr()
    return RobinBlocks(uu=uu, uU=uU, UU=sp.diags(UU, format="csr"))
