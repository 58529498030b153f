"""The regularized Levenberg-Marquardt step.

The step `τ` solves, in weak form against the nodal basis,

    Σ_m ⟨E'_m τ, E'_m w⟩ + α ⟨Rτ, w⟩ = Σ_m ⟨E^δ_m − E_m(σ), E'_m w⟩,

with `R = I + β²Δ²` the Gram operator. The operator on the left is symmetric
positive definite; it is inverted by conjugate gradients preconditioned with
`(αR)⁻¹`, applying the normal part through two linearized solves per
measurement.
"""

import math
import time
import warnings
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from aettools.exceptions import ConvergenceError, InvalidFieldError
from aettools.fem.fields import CellField, ScalarField
from aettools.logger import LOGGER
from aettools.phantoms.mollifier import mollify
from aettools.sensitivity.frechet import measurement_pool, weak_adjoint, weak_normal
from aettools.sensitivity.gram import GramOperator
from aettools.sensitivity.state import LinearizationState
from aettools.warnings import InnerSolveInaccurate

__all__ = (
    "StepResult",
    "alpha_schedule",
    "truncate_update",
    "step_rhs",
    "apply_step_operator",
    "lm_step",
)

# accepted mismatch between the CG recurrence and an independent application
_RESIDUAL_SLACK = 10.0


@dataclass(frozen=True)
class StepResult:
    """Outcome of [`lm_step`][aettools.reconstruction.step.lm_step].

    Attributes:
        tau: The truncated update.
        residual: Relative residual of the untruncated solution, measured by
            an independent application of the step operator.
        iterations: CG iterations.
        converged: Whether CG met its tolerance.
        wall_time: Seconds spent in the step.

    """

    tau: ScalarField
    residual: float
    iterations: int
    converged: bool
    wall_time: float


def alpha_schedule(alpha0: float, decay: float, k: int) -> float:
    """`α_k = α₀ / a^k`."""
    if alpha0 <= 0 or decay <= 1 or k < 0:
        raise InvalidFieldError("Need α₀ > 0, a > 1 and k >= 0.")
    return alpha0 / decay**k


def truncate_update(
    tau: ScalarField, distance: ScalarField, width: float
) -> ScalarField:
    """Zero `tau` at every node within `width` of the boundary.

    `width = 0` leaves the update untouched.
    """
    if width < 0:
        raise InvalidFieldError(f"Collar width must be non-negative, got {width}.")
    if width == 0:
        return tau
    if distance.mesh is not tau.mesh:
        raise InvalidFieldError("Distance field lives on a different mesh than τ.")
    values = tau.values.copy()
    values[distance.values <= width] = 0.0
    return tau.with_values(values)


def step_rhs(
    states: Sequence[LinearizationState],
    residuals: Sequence[CellField],
) -> np.ndarray:
    """Moments of `Σ_m E'_m* (E^δ_m − E_m(σ))` against the nodal basis."""
    if len(states) != len(residuals):
        raise InvalidFieldError(
            f"{len(states)} linearization states for {len(residuals)} residuals."
        )
    return np.sum(
        [weak_adjoint(state, z) for state, z in zip(states, residuals)], axis=0
    )


def apply_step_operator(
    states: Sequence[LinearizationState],
    gram: GramOperator,
    alpha: float,
    tau: ScalarField,
    threads: Optional[int] = None,
    pool: Optional[ThreadPoolExecutor] = None,
) -> np.ndarray:
    """Moments of `(Σ_m E'_m* E'_m + αR) τ` against the nodal basis."""
    return weak_normal(states, tau, threads, pool) + alpha * gram.weak(tau)


def lm_step(
    states: Sequence[LinearizationState],
    residuals: Sequence[CellField],
    alpha: float,
    gram: GramOperator,
    distance: Optional[ScalarField] = None,
    known_width: float = 0.0,
    cg_tol: float = 1e-8,
    cg_max_iter: int = 200,
    smooth_radius: float = 0.0,
    threads: Optional[int] = None,
) -> StepResult:
    """Solve for one regularized Gauss-Newton update and truncate it.

    Parameters:
        states: Linearizations of all measurements at the current σ.
        residuals: Data residuals `E^δ_m − E_m(σ)`, one per state.
        alpha: Regularization parameter.
        gram: Gram operator on the mesh of the states.
        distance: Boundary distance of the nodes, needed when `known_width > 0`.
        known_width: Width of the collar where the update is zeroed.
        cg_tol: Relative tolerance of the CG solve.
        cg_max_iter: Iteration cap of the CG solve.
        smooth_radius: If positive, the truncated update is mollified with
            this radius and truncated again.
        threads: Workers for the per-measurement solves; one pool serves the
            whole CG solve.

    Raises:
        ConvergenceError: If CG stops far from the tolerance; a larger α
            makes the step equation better conditioned.

    """
    start = time.perf_counter()
    mesh = gram.mesh
    if alpha <= 0:
        raise InvalidFieldError(f"α must be positive, got {alpha}.")
    if known_width > 0 and distance is None:
        raise InvalidFieldError("A boundary distance field is needed to truncate τ.")

    rhs = step_rhs(states, residuals)
    scale = float(np.linalg.norm(rhs))
    if scale == 0:
        elapsed = time.perf_counter() - start
        return StepResult(ScalarField.zeros(mesh), 0.0, 0, True, elapsed)

    n = mesh.n_vertices
    preconditioner = LinearOperator(
        (n, n), matvec=lambda r: gram.solve_weak(r) / alpha, dtype=float
    )
    counter = {"n": 0}

    def count(_):
        counter["n"] += 1

    with measurement_pool(threads, len(states)) as pool:
        operator = LinearOperator(
            (n, n),
            matvec=lambda x: apply_step_operator(
                states, gram, alpha, ScalarField(mesh, x), threads, pool
            ),
            dtype=float,
        )
        solution, info = cg(
            operator,
            rhs,
            rtol=cg_tol,
            atol=0.0,
            maxiter=cg_max_iter,
            M=preconditioner,
            callback=count,
        )
        tau = ScalarField(mesh, solution)
        check = apply_step_operator(states, gram, alpha, tau, threads, pool)
    residual = float(np.linalg.norm(check - rhs) / scale)
    converged = info == 0 and residual <= _RESIDUAL_SLACK * cg_tol
    if not converged:
        if residual > math.sqrt(cg_tol):
            raise ConvergenceError(
                f"Step solve stopped at relative residual {residual:.2e} after "
                f"{counter['n']} iterations with α = {alpha:.3e}; increase α₀."
            )
        warnings.warn(
            InnerSolveInaccurate(
                f"Step solve reached a relative residual of {residual:.2e} "
                f"(requested {cg_tol:.1e}) in {counter['n']} iterations."
            )
        )

    if distance is not None:
        tau = truncate_update(tau, distance, known_width)
        if smooth_radius > 0:
            tau = truncate_update(mollify(tau, smooth_radius), distance, known_width)
    elif smooth_radius > 0:
        tau = mollify(tau, smooth_radius)

    result = StepResult(
        tau, residual, counter["n"], converged, time.perf_counter() - start
    )
    LOGGER.debug(
        "LM step with α = %.3e: %d CG iterations, residual %.2e, %.3f s.",
        alpha,
        result.iterations,
        result.residual,
        result.wall_time,
    )
    return result
