"""Levenberg-Marquardt reconstruction loops.

All loops share one iteration: linearize every measurement at `σ_k`, solve
the regularized step equation, truncate the step in the known boundary
collar, update `σ_{k+1} = σ_k + τ_k` with a positivity floor, and stop once
`‖τ_k‖ < step_tol` or the iteration cap is hit. The regularization decays as
`α_k = α₀ / a^k`.
"""

import time
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Literal, Optional

import numpy as np

from aettools.config import CONFIG
from aettools.exceptions import ConvergenceError, InvalidFieldError
from aettools.fem.fields import CellField, ScalarField
from aettools.fem.operations import l2_norm
from aettools.forward.power import power_density
from aettools.forward.solvers import (
    BoundaryTrace,
    DirichletSystem,
    ElectrodeModelLike,
    ElectrodeSystem,
    ForwardSolution,
)
from aettools.logger import LOGGER
from aettools.mesh.queries import boundary_distance_field, extract_interior_submesh
from aettools.models.electrodes import ScemModel
from aettools.models.lm import LmConfig
from aettools.models.noise import NoiseSpec
from aettools.models.records import IterationRecord
from aettools.phantoms.metrics import relative_error
from aettools.phantoms.noise import add_noise
from aettools.reconstruction.measurements import (
    Measurement,
    boundary_voltage_error,
    extract_boundary_trace,
)
from aettools.reconstruction.step import lm_step
from aettools.sensitivity.gram import gram_assemble
from aettools.sensitivity.state import (
    LinearizationState,
    frozen_boundary_system,
    linearize,
)
from aettools.warnings import BoundaryTargetNotReached, ConductivityClamped

if TYPE_CHECKING:  # pragma: no cover
    from aettools.mesh.types import Mesh, Submesh

__all__ = (
    "LmResult",
    "MixedResult",
    "IterationCallback",
    "PowerDensityOracle",
    "dcm_power_oracle",
    "compose_interior",
    "lm_scem",
    "lm_dcm",
    "mixed_reconstruction",
)

IterationCallback = Callable[[int, ScalarField, IterationRecord], None]
"""Called after every update with `k`, `σ_{k+1}` and the iteration record."""

PowerDensityOracle = Callable[["Submesh", Sequence[BoundaryTrace]], list[CellField]]
"""Noise-free power densities on an interior domain for the given traces."""

Linearizer = Callable[
    [ScalarField], tuple[list[LinearizationState], list[ForwardSolution]]
]

StopReason = Literal[
    "max-iter", "step-tol", "boundary-target", "inner-solve-failed"
]


@dataclass
class LmResult:
    """Reconstructed conductivity and the iteration history.

    Unpacks as `sigma, records = result`.
    """

    sigma: ScalarField
    records: list[IterationRecord] = field(default_factory=list)
    stop_reason: StopReason = "max-iter"

    def __iter__(self):
        yield self.sigma
        yield self.records


@dataclass
class MixedResult(LmResult):
    """Result of the mixed strategy, keeping both phases for inspection."""

    submesh: Optional["Submesh"] = None
    phase1: Optional[LmResult] = None
    phase2: Optional[LmResult] = None


def _clamp(sigma: ScalarField) -> tuple[ScalarField, int]:
    floor = CONFIG.clamp_floor
    low = sigma.values < floor
    count = int(low.sum())
    if count == 0:
        return sigma, 0
    warnings.warn(
        ConductivityClamped(
            f"{count} nodes fell below {floor:.1e} S/m and were clamped."
        )
    )
    return sigma.with_values(np.maximum(sigma.values, floor)), count


def _electrode_linearizer(
    mesh: "Mesh",
    model: ElectrodeModelLike,
    measurements: Sequence[Measurement],
    frozen_boundary: bool,
) -> Linearizer:
    def at(sigma: ScalarField):
        system = ElectrodeSystem(mesh, sigma, model)
        patterns = [m.pattern for m in measurements]
        solutions = [system.solve(p) for p in patterns]  # type: ignore[arg-type]
        linear = frozen_boundary_system(system) if frozen_boundary else None
        return linearize(system, solutions, linear), solutions

    return at


def _dirichlet_linearizer(
    mesh: "Mesh", measurements: Sequence[Measurement]
) -> Linearizer:
    def at(sigma: ScalarField):
        system = DirichletSystem(mesh, sigma)
        solutions = [system.solve(m.trace) for m in measurements]
        return linearize(system, solutions), solutions

    return at


def _check_measurements(
    mesh: "Mesh", measurements: Sequence[Measurement], kind: Literal["pattern", "trace"]
) -> None:
    if not measurements:
        raise InvalidFieldError("At least one measurement is needed.")
    for m in measurements:
        if m.mesh is not mesh:
            raise InvalidFieldError("Measurement lives on a different mesh.")
        if getattr(m, kind) is None:
            raise InvalidFieldError(f"Measurement {m.label!r} carries no {kind}.")


def _run_lm(
    config: LmConfig,
    mesh: "Mesh",
    measurements: Sequence[Measurement],
    sigma0: ScalarField,
    linearize_at: Linearizer,
    *,
    phase: Literal["lm-scem", "lm-dcm"],
    max_iter: int,
    known_width: float,
    known: Optional[ScalarField] = None,
    error: Optional[Callable[[ScalarField], float]] = None,
    eta_b_target: Optional[float] = None,
    start_k: int = 0,
    threads: Optional[int] = None,
    callback: Optional[IterationCallback] = None,
) -> LmResult:
    if sigma0.mesh is not mesh:
        raise InvalidFieldError("σ₀ lives on a different mesh.")
    if sigma0.min() <= 0:
        raise InvalidFieldError("σ₀ must be positive.")

    distance = boundary_distance_field(mesh) if known_width > 0 else None
    collar = None if distance is None else distance.values <= known_width
    sigma = sigma0
    if collar is not None and known is not None:
        values = sigma.values.copy()
        values[collar] = known.values[collar]
        sigma = sigma.with_values(values)

    if max_iter == 0:
        return LmResult(sigma)
    gram = gram_assemble(mesh, config.beta)
    smooth_radius = config.smooth_radius if config.smooth_truncation else 0.0
    result = LmResult(sigma)

    for k in range(start_k, start_k + max_iter):
        start = time.perf_counter()
        alpha = config.alpha(k)
        states, solutions = linearize_at(sigma)
        residuals = [
            m.E_delta - state.power_density() for m, state in zip(measurements, states)
        ]
        misfit = float(sum(l2_norm(z) ** 2 for z in residuals))
        eta_b = tuple(
            boundary_voltage_error(m.U_true, solution.U)
            for m, solution in zip(measurements, solutions)
            if m.U_true is not None
        )

        if eta_b_target is not None and eta_b and max(eta_b) < eta_b_target:
            result.records.append(
                IterationRecord(
                    k=k,
                    phase=phase,
                    alpha=alpha,
                    step_norm=0.0,
                    step_residual=0.0,
                    misfit=misfit,
                    eta=error(sigma) if error else None,
                    eta_b=eta_b,
                    wall_time=time.perf_counter() - start,
                    flags=("boundary-target-reached",),
                )
            )
            LOGGER.info(
                "[%s] k=%d: η^b = %.2e below %.1e for all patterns.",
                phase,
                k,
                max(eta_b),
                eta_b_target,
            )
            result.stop_reason = "boundary-target"
            break

        try:
            step = lm_step(
                states,
                residuals,
                alpha,
                gram,
                distance=distance,
                known_width=known_width,
                cg_tol=config.cg_tol,
                cg_max_iter=config.cg_max_iter,
                smooth_radius=smooth_radius,
                threads=threads,
            )
        except ConvergenceError as exc:
            LOGGER.error("[%s] k=%d: %s", phase, k, exc)
            result.records.append(
                IterationRecord(
                    k=k,
                    phase=phase,
                    alpha=alpha,
                    step_norm=0.0,
                    step_residual=0.0,
                    misfit=misfit,
                    eta=error(sigma) if error else None,
                    eta_b=eta_b,
                    wall_time=time.perf_counter() - start,
                    flags=("inner-solve-failed",),
                )
            )
            result.stop_reason = "inner-solve-failed"
            break

        flags = [] if step.converged else ["inner-inaccurate"]
        sigma, clamped = _clamp(sigma + step.tau)
        if clamped:
            flags.append("clamped")
        if collar is not None and known is not None:
            values = sigma.values.copy()
            values[collar] = known.values[collar]
            sigma = sigma.with_values(values)
        result.sigma = sigma

        step_norm = l2_norm(step.tau)
        record = IterationRecord(
            k=k,
            phase=phase,
            alpha=alpha,
            step_norm=step_norm,
            step_residual=step.residual,
            misfit=misfit,
            eta=error(sigma) if error else None,
            eta_b=eta_b,
            clamped=clamped,
            wall_time=time.perf_counter() - start,
            flags=tuple(flags),
        )
        result.records.append(record)
        LOGGER.info(
            "[%s] k=%d α=%.3e ‖τ‖=%.3e misfit=%.3e η=%s (%.1f s)",
            phase,
            k,
            alpha,
            step_norm,
            misfit,
            "n/a" if record.eta is None else f"{record.eta:.3e}",
            record.wall_time,
        )
        if callback is not None:
            callback(k, sigma, record)
        if step_norm < config.step_tol:
            result.stop_reason = "step-tol"
            break
    return result


def _error_against(
    truth: Optional[ScalarField],
) -> Optional[Callable[[ScalarField], float]]:
    if truth is None:
        return None
    return lambda sigma: relative_error(truth, sigma)


def lm_scem(
    config: LmConfig,
    mesh: "Mesh",
    measurements: Sequence[Measurement],
    sigma0: ScalarField,
    truth: Optional[ScalarField] = None,
    model: Optional[ElectrodeModelLike] = None,
    *,
    known: Optional[ScalarField] = None,
    threads: Optional[int] = None,
    callback: Optional[IterationCallback] = None,
) -> LmResult:
    """Reconstruct σ from electrode measurements.

    Parameters:
        config: LM hyperparameters; `max_iter` and `known_width` apply.
        mesh: Mesh with electrodes.
        measurements: Power densities with their current patterns.
        sigma0: Initial guess.
        truth: True conductivity, used for error reporting.
        model: Electrode model of the forward solves (SCEM by default).
        known: Conductivity in the boundary collar, held fixed; `truth` if
            omitted.
        threads: Workers for per-measurement solves.
        callback: Called after every update.

    Returns:
        The reconstruction and one record per iteration.

    """
    _check_measurements(mesh, measurements, "pattern")
    linearizer = _electrode_linearizer(
        mesh,
        ScemModel() if model is None else model,
        measurements,
        config.linearization == "dirichlet",
    )
    return _run_lm(
        config,
        mesh,
        measurements,
        sigma0,
        linearizer,
        phase="lm-scem",
        max_iter=config.max_iter,
        known_width=config.known_width,
        known=truth if known is None else known,
        error=_error_against(truth),
        threads=threads,
        callback=callback,
    )


def lm_dcm(
    config: LmConfig,
    mesh: "Mesh",
    measurements: Sequence[Measurement],
    sigma0: ScalarField,
    truth: Optional[ScalarField] = None,
    *,
    known: Optional[ScalarField] = None,
    threads: Optional[int] = None,
    callback: Optional[IterationCallback] = None,
) -> LmResult:
    """Reconstruct σ from continuum-model measurements with prescribed
    boundary potentials on the Dirichlet boundary of `mesh`.

    Parameters are as for [`lm_scem`][aettools.reconstruction.loops.lm_scem].
    """
    _check_measurements(mesh, measurements, "trace")
    return _run_lm(
        config,
        mesh,
        measurements,
        sigma0,
        _dirichlet_linearizer(mesh, measurements),
        phase="lm-dcm",
        max_iter=config.max_iter,
        known_width=config.known_width,
        known=truth if known is None else known,
        error=_error_against(truth),
        threads=threads,
        callback=callback,
    )


def dcm_power_oracle(truth: ScalarField) -> PowerDensityOracle:
    """Oracle simulating interior power densities with the continuum model at
    the conductivity `truth` of the parent mesh."""

    def oracle(submesh: "Submesh", traces: Sequence[BoundaryTrace]) -> list[CellField]:
        sigma = truth.restrict(submesh)
        system = DirichletSystem(submesh.mesh, sigma)
        return [power_density(sigma, system.solve(trace)) for trace in traces]

    return oracle


def compose_interior(
    parent: ScalarField, interior: ScalarField, submesh: "Submesh"
) -> ScalarField:
    """`parent` with its values on the submesh vertices replaced by `interior`."""
    values = parent.values.copy()
    values[submesh.vertex_map] = interior.values
    return parent.with_values(values)


def mixed_reconstruction(
    config: LmConfig,
    mesh: "Mesh",
    measurements: Sequence[Measurement],
    sigma0: ScalarField,
    truth: Optional[ScalarField] = None,
    model: Optional[ElectrodeModelLike] = None,
    *,
    noise: NoiseSpec = NoiseSpec(),
    power_density_oracle: Optional[PowerDensityOracle] = None,
    known: Optional[ScalarField] = None,
    threads: Optional[int] = None,
    callback: Optional[IterationCallback] = None,
) -> MixedResult:
    """Two-phase reconstruction: electrode-model LM until the electrode
    voltages are matched, then continuum-model LM on an interior domain.

    Phase 1 runs LM-SCEM until `η^b < eta_b_target` for every pattern or
    `phase1_max_iter` is reached. The interior domain keeps the vertices
    farther than `submesh_distance` from the boundary; its boundary
    potentials are read off the phase-1 forward solutions. Interior power
    densities for those potentials come from `power_density_oracle`, by
    default continuum-model simulations at `truth`, with fresh noise drawn
    from `noise`. Without truth or oracle the measured power densities are
    restricted to the interior domain instead. Phase 2 runs LM-DCM from the
    phase-1 conductivity for up to `phase2_max_iter` iterations, continuing
    the α schedule, and its result overwrites the phase-1 conductivity on
    the interior domain.

    Raises:
        InvalidFieldError: If a measurement lacks its electrode voltages.

    """
    _check_measurements(mesh, measurements, "pattern")
    if any(m.U_true is None for m in measurements):
        raise InvalidFieldError(
            "The mixed strategy needs the measured electrode voltages."
        )
    model = ScemModel() if model is None else model
    known = truth if known is None else known
    error = _error_against(truth)

    frozen = config.linearization == "dirichlet"
    phase1 = _run_lm(
        config,
        mesh,
        measurements,
        sigma0,
        _electrode_linearizer(mesh, model, measurements, frozen),
        phase="lm-scem",
        max_iter=config.phase1_max_iter,
        known_width=config.known_width,
        known=known,
        error=error,
        eta_b_target=config.eta_b_target,
        threads=threads,
        callback=callback,
    )
    if phase1.stop_reason != "boundary-target":
        warnings.warn(
            BoundaryTargetNotReached(
                f"η^b stayed above {config.eta_b_target:.1e} after "
                f"{len(phase1.records)} LM-SCEM iterations."
            )
        )
        if phase1.records:
            last = phase1.records[-1]
            phase1.records[-1] = last.model_copy(
                update={"flags": last.flags + ("boundary-target-missed",)}
            )

    submesh = extract_interior_submesh(mesh, config.submesh_distance)
    system = ElectrodeSystem(mesh, phase1.sigma, model)
    traces = [
        extract_boundary_trace(system.solve(pattern).u, submesh)  # type: ignore[arg-type]
        for pattern in (m.pattern for m in measurements)
    ]
    oracle = power_density_oracle
    if oracle is None and truth is not None:
        oracle = dcm_power_oracle(truth)
    if oracle is not None:
        powers = oracle(submesh, traces)
        offset = len(measurements)
        interior = [
            Measurement(
                E_delta=add_noise(power, noise.for_pattern(offset + m)), trace=trace
            )
            for m, (power, trace) in enumerate(zip(powers, traces))
        ]
    else:
        LOGGER.warning(
            "No truth or power density oracle given; restricting the measured "
            "power densities to the interior domain."
        )
        interior = [
            Measurement(E_delta=m.E_delta.restrict(submesh), trace=trace)
            for m, trace in zip(measurements, traces)
        ]

    def composite_error(sigma: ScalarField) -> float:
        return error(compose_interior(phase1.sigma, sigma, submesh))  # type: ignore[misc]

    def composite_callback(k: int, sigma: ScalarField, record: IterationRecord) -> None:
        callback(k, compose_interior(phase1.sigma, sigma, submesh), record)  # type: ignore[misc]

    start_k = phase1.records[-1].k + 1 if phase1.records else 0
    if phase1.stop_reason in ("boundary-target", "inner-solve-failed"):
        # the last phase-1 record took no step, so its α is still unused
        start_k -= 1
    phase2 = _run_lm(
        config,
        submesh.mesh,
        interior,
        phase1.sigma.restrict(submesh),
        _dirichlet_linearizer(submesh.mesh, interior),
        phase="lm-dcm",
        max_iter=config.phase2_max_iter,
        known_width=config.phase2_known_width,
        known=None if known is None else known.restrict(submesh),
        error=composite_error if error else None,
        start_k=start_k,
        threads=threads,
        callback=composite_callback if callback else None,
    )
    return MixedResult(
        sigma=compose_interior(phase1.sigma, phase2.sigma, submesh),
        records=phase1.records + phase2.records,
        stop_reason=phase2.stop_reason,
        submesh=submesh,
        phase1=phase1,
        phase2=phase2,
    )
