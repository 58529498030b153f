"""Sparse linear solves with affinely eliminated constraints.

A constrained system is stored as the full symmetric matrix `A`, the right
hand side `b` and an affine parametrization `x = Q y + x0` of the admissible
unknowns. Solving means solving the reduced system `Qᵀ A Q y = Qᵀ (b − A x0)`,
so constraints such as grounding or Dirichlet values hold exactly.
"""

import threading
import time
import weakref
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Literal, Optional, Union

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg, splu

from aettools.config import CONFIG
from aettools.exceptions import ConvergenceError, SingularSystemError
from aettools.fem.assembly import assemble_mass
from aettools.logger import LOGGER

if TYPE_CHECKING:  # pragma: no cover
    from aettools.mesh.types import Mesh

__all__ = (
    "SolveReport",
    "SparseSystem",
    "Factorization",
    "ConstrainedFactorization",
    "zero_sum_basis",
    "dirichlet_basis",
    "solve_constrained",
    "mass_matrix",
    "mass_factorization",
    "mass_solve",
    "dump_matrix_market",
)


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a linear solve.

    Attributes:
        iterations: Iterations used (1 for a direct solve).
        residual_norm: Relative residual of the reduced system.
        wall_time: Seconds spent in the solve, factorization included.
        method: `"direct"` or `"cg"`.

    """

    iterations: int
    residual_norm: float
    wall_time: float
    method: str = "direct"


@dataclass(frozen=True, eq=False)
class SparseSystem:
    """A symmetric linear system with eliminated affine constraints.

    Attributes:
        matrix: `(n, n)` symmetric sparse matrix.
        rhs: `(n,)` right-hand side.
        basis: `(n, m)` sparse matrix `Q`; `None` means no constraint.
        offset: `(n,)` vector `x0`; `None` means zero.

    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    basis: Optional[sp.csr_matrix] = None
    offset: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        n = self.matrix.shape[0]
        if self.matrix.shape != (n, n):
            raise SingularSystemError(f"Matrix must be square, got {self.matrix.shape}.")
        if np.shape(self.rhs) != (n,):
            raise SingularSystemError(
                f"Right-hand side has shape {np.shape(self.rhs)} for {n} unknowns."
            )
        if self.basis is not None and self.basis.shape[0] != n:
            raise SingularSystemError("Constraint basis does not match the matrix.")

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def Q(self) -> sp.csr_matrix:
        if self.basis is None:
            return sp.identity(self.size, format="csr")
        return self.basis

    @property
    def x0(self) -> np.ndarray:
        return np.zeros(self.size) if self.offset is None else np.asarray(self.offset)

    def reduced(self) -> tuple[sp.csc_matrix, np.ndarray]:
        Q = self.Q
        return (
            (Q.T @ self.matrix @ Q).tocsc(),
            Q.T @ (self.rhs - self.matrix @ self.x0),
        )


def zero_sum_basis(n: int, indices: np.ndarray) -> sp.csr_matrix:
    """Basis `Q` of `{x ∈ Rⁿ : Σ_{i ∈ indices} x_i = 0}` that eliminates the
    last of `indices`: `x_last = −Σ` of the others."""
    indices = np.asarray(indices, dtype=np.int64)
    last = int(indices[-1])
    free = np.delete(np.arange(n), last)
    columns = np.arange(n - 1)

    others = np.isin(free, indices)
    rows = np.concatenate((free, np.full(int(others.sum()), last)))
    cols = np.concatenate((columns, columns[others]))
    vals = np.concatenate((np.ones(n - 1), -np.ones(int(others.sum()))))
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n - 1))


def dirichlet_basis(
    n: int, fixed: np.ndarray, values: np.ndarray
) -> tuple[sp.csr_matrix, np.ndarray]:
    """Basis of the free unknowns and the offset carrying `x[fixed] = values`."""
    fixed = np.asarray(fixed, dtype=np.int64)
    free = np.setdiff1d(np.arange(n), fixed)
    basis = sp.csr_matrix(
        (np.ones(len(free)), (free, np.arange(len(free)))), shape=(n, len(free))
    )
    offset = np.zeros(n)
    offset[fixed] = values
    return basis, offset


class Factorization:
    """Sparse LU factorization of a square matrix, reusable across right-hand
    sides and safe to share between threads.

    SuperLU solves are not reentrant, so concurrent callers take turns on
    the triangular solves.
    """

    def __init__(self, matrix: sp.spmatrix) -> None:
        start = time.perf_counter()
        self.shape = matrix.shape
        try:
            self._lu = splu(sp.csc_matrix(matrix))
        except RuntimeError as exc:
            raise SingularSystemError(f"Factorization failed: {exc}") from exc
        self._lock = threading.Lock()
        self.wall_time = time.perf_counter() - start
        LOGGER.debug(
            "Factorized %dx%d matrix in %.3f s.", self.shape[0], self.shape[1], self.wall_time
        )

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        with self._lock:
            solution = self._lu.solve(np.asarray(rhs, dtype=float))
        if not np.all(np.isfinite(solution)):
            raise SingularSystemError("Solve produced non-finite values.")
        return solution


class ConstrainedFactorization:
    """Factorization of `Qᵀ A Q` mapping loads on the full unknowns to
    constrained solutions `x = Q y`."""

    def __init__(self, matrix: sp.spmatrix, basis: Optional[sp.spmatrix] = None) -> None:
        self.matrix = sp.csr_matrix(matrix)
        self.basis = (
            sp.identity(self.matrix.shape[0], format="csr")
            if basis is None
            else sp.csr_matrix(basis)
        )
        self.reduced = (self.basis.T @ self.matrix @ self.basis).tocsc()
        self.factorization = Factorization(self.reduced)

    def solve(self, load: np.ndarray, offset: Optional[np.ndarray] = None) -> np.ndarray:
        """Solve `Qᵀ A (Q y + x0) = Qᵀ load` and return `Q y + x0`."""
        load = np.asarray(load, dtype=float)
        if offset is not None:
            load = load - self.matrix @ offset
        x = self.basis @ self.factorization.solve(self.basis.T @ load)
        return x if offset is None else x + offset

    def residual(
        self, x: np.ndarray, load: np.ndarray, offset: Optional[np.ndarray] = None
    ) -> float:
        """Relative residual `‖Qᵀ(Ax − load)‖ / ‖Qᵀ(load − A x0)‖` of a solution."""
        effective = load if offset is None else load - self.matrix @ offset
        reduced_load = self.basis.T @ effective
        scale = np.linalg.norm(reduced_load)
        residual = np.linalg.norm(self.basis.T @ (self.matrix @ x - load))
        return float(residual / scale) if scale > 0 else float(residual)


def solve_constrained(
    system: SparseSystem,
    tol: Optional[float] = None,
    method: Literal["direct", "cg"] = "direct",
    max_iter: int = 10_000,
) -> tuple[np.ndarray, SolveReport]:
    """Solve a constrained system.

    Parameters:
        system: The system to solve.
        tol: Relative tolerance on the reduced residual; `CONFIG.solver_tol`
            if omitted.
        method: Sparse LU (`"direct"`) or Jacobi-preconditioned conjugate
            gradients (`"cg"`).
        max_iter: Iteration cap of the conjugate gradient method.

    Returns:
        The solution of the full system and a report of the solve.

    Raises:
        SingularSystemError: If the reduced matrix is singular.
        ConvergenceError: If CG does not converge within `max_iter`
            iterations, or a direct solve misses the tolerance.

    """
    tol = CONFIG.solver_tol if tol is None else tol
    start = time.perf_counter()
    matrix, load = system.reduced()
    scale = np.linalg.norm(load)

    if scale == 0:
        report = SolveReport(0, 0.0, time.perf_counter() - start, method)
        return system.x0.copy(), report

    if method == "direct":
        y = Factorization(matrix).solve(load)
        iterations = 1
    elif method == "cg":
        diagonal = matrix.diagonal()
        if np.any(diagonal <= 0):
            raise SingularSystemError("Matrix has non-positive diagonal entries.")
        preconditioner = LinearOperator(matrix.shape, matvec=lambda r: r / diagonal)
        counter = {"n": 0}

        def count(_):
            counter["n"] += 1

        y, info = cg(
            matrix,
            load,
            rtol=tol,
            atol=0.0,
            maxiter=max_iter,
            M=preconditioner,
            callback=count,
        )
        if info != 0:
            raise ConvergenceError(
                f"CG did not converge within {max_iter} iterations (info={info})."
            )
        iterations = counter["n"]
    else:
        raise ValueError(f"Unknown method {method!r}.")

    residual = float(np.linalg.norm(matrix @ y - load) / scale)
    report = SolveReport(iterations, residual, time.perf_counter() - start, method)
    if residual > max(tol, 1e-15) * 10 and method == "direct":
        raise SingularSystemError(
            f"Direct solve residual {residual:.3e} exceeds tolerance {tol:.1e}; "
            "the system is (numerically) singular."
        )
    LOGGER.debug(
        "Solved %d unknowns (%s): %d iterations, residual %.2e, %.3f s.",
        system.size,
        method,
        report.iterations,
        report.residual_norm,
        report.wall_time,
    )
    return system.Q @ y + system.x0, report


@dataclass
class _MassCache:
    lock: threading.Lock = field(default_factory=threading.Lock)
    matrices: "weakref.WeakKeyDictionary[Mesh, sp.csr_matrix]" = field(
        default_factory=weakref.WeakKeyDictionary
    )
    factorizations: "weakref.WeakKeyDictionary[Mesh, Factorization]" = field(
        default_factory=weakref.WeakKeyDictionary
    )


_MASS_CACHE = _MassCache()


def mass_matrix(mesh: "Mesh") -> sp.csr_matrix:
    """Consistent mass matrix of `mesh`, cached for the lifetime of the mesh."""
    with _MASS_CACHE.lock:
        matrix = _MASS_CACHE.matrices.get(mesh)
        if matrix is None:
            matrix = assemble_mass(mesh)
            _MASS_CACHE.matrices[mesh] = matrix
    return matrix


def mass_factorization(mesh: "Mesh") -> Factorization:
    """Factorized mass matrix of `mesh`, cached for the lifetime of the mesh."""
    matrix = mass_matrix(mesh)
    with _MASS_CACHE.lock:
        factorization = _MASS_CACHE.factorizations.get(mesh)
        if factorization is None:
            factorization = Factorization(matrix)
            _MASS_CACHE.factorizations[mesh] = factorization
    return factorization


def mass_solve(mesh: "Mesh", rhs: np.ndarray) -> np.ndarray:
    return mass_factorization(mesh).solve(rhs)


def dump_matrix_market(
    matrix: sp.spmatrix, path: Union[str, Path], comment: str = ""
) -> Path:
    """Write `matrix` in Matrix Market text format for offline inspection."""
    path = Path(path)
    if path.suffix != ".mtx":
        path = path.with_name(path.name + ".mtx")
    scipy.io.mmwrite(str(path), sp.coo_matrix(matrix), comment=comment)
    LOGGER.debug("Dumped %s matrix to %s.", matrix.shape, path)
    return path
