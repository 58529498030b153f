"""The diagnostic suite behind `aet check`.

Every check is a method decorated with
[`check_case`][aettools.cli.checks.check_case], which records successes
and failures in a [`CheckResults`][aettools.cli.checks.CheckResults]
instance, together with the measured discrepancy of every draw.
"""

import csv
import dataclasses
import traceback as tb
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Optional, Union

import numpy as np
from rich.console import Console

from aettools.exceptions import CheckFailure
from aettools.fem.fields import CellField, ScalarField
from aettools.fem.operations import l2_inner, l2_norm
from aettools.forward.patterns import fourier_pattern
from aettools.forward.solvers import DirichletSystem, ElectrodeSystem
from aettools.logger import LOGGER
from aettools.mesh.generators import generate_mesh
from aettools.mesh.types import DIRICHLET_CODE, Mesh
from aettools.models.electrodes import ElectrodeLayout
from aettools.models.experiment import ExperimentConfig
from aettools.sensitivity.diagnostics import (
    AdjointHook,
    adjoint_identity_report,
    electrode_edge_report,
    gram_eigenfunction_report,
    random_smooth_field,
    taylor_report,
)
from aettools.sensitivity.frechet import adjoint, apply_normal
from aettools.sensitivity.state import LinearizationState, linearize

__all__ = (
    "CheckRow",
    "CheckResults",
    "check_case",
    "CheckSuite",
    "flipped_adjoint",
)

_GROUNDING_TOL = 1e-12
_GRAM_MIN_RATIO = 3.0
_SYMMETRY_TOL = 1e-8


def flipped_adjoint(state: LinearizationState, z: CellField) -> ScalarField:
    """The adjoint with its sign flipped; the suite must reject it."""
    return -adjoint(state, z)


@dataclasses.dataclass(frozen=True)
class CheckRow:
    """One measured quantity of a check."""

    check: str
    draw: int
    quantity: str
    value: float
    limit: str
    passed: bool


@dataclasses.dataclass
class CheckResults:
    """A dataclass to store and print the results of the diagnostic suite."""

    success_count: int = 0
    failure_count: int = 0
    internal_failure_count: int = 0
    failure_messages: list[tuple[str, str]] = dataclasses.field(
        default_factory=list
    )
    internal_failure_messages: list[tuple[str, str]] = dataclasses.field(
        default_factory=list
    )
    rows: list[CheckRow] = dataclasses.field(default_factory=list)
    verbosity: int = 0
    console: Console = dataclasses.field(
        default_factory=lambda: Console(highlight=False)
    )

    @property
    def passed(self) -> bool:
        return self.failure_count == 0 and self.internal_failure_count == 0

    def add_success(self, summary: str) -> None:
        self.success_count += 1
        if self.verbosity > 0:
            self.console.print(f"[bold green]✔: {summary}[/]")
        elif self.verbosity == 0:
            self.console.print("[bold green].[/]", end="")

    def add_failure(
        self, summary: str, message: str, internal: bool = False
    ) -> None:
        """Register a failed check.

        Parameters:
            summary: Short error message.
            message: Full error message, potentially containing a traceback.
            internal: Whether the check crashed rather than failed.

        """
        if internal:
            self.internal_failure_count += 1
            self.internal_failure_messages.append((summary, message))
        else:
            self.failure_count += 1
            self.failure_messages.append((summary, message))

        symbol = "!" if internal else "✖"
        if self.verbosity == 0:
            self.console.print(f"[bold red]{symbol}[/]", end="")
        elif self.verbosity > 0:
            self.console.print(f"[bold red]{symbol}: {summary}[/]")
            for line in message.split("\n"):
                self.console.print(f"[yellow]\t{line}[/]")

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow([f.name for f in dataclasses.fields(CheckRow)])
            for row in self.rows:
                writer.writerow(
                    [
                        row.check,
                        row.draw,
                        row.quantity,
                        repr(row.value),
                        row.limit,
                        row.passed,
                    ]
                )
        return path


def check_case(check_fn: Callable[..., tuple[Any, str]]):
    """Wrapper for check methods: collates successes and failures and
    returns the result and message of the check to the caller.

    The wrapped method raises `CheckFailure` when the check has failed;
    any other exception is counted as an internal failure.
    """

    @wraps(check_fn)
    def wrapper(suite: "CheckSuite", *args, **kwargs):
        try:
            result, msg = check_fn(suite, *args, **kwargs)
        except CheckFailure as exc:
            suite.results.add_failure(f"{check_fn.__name__} - failed", str(exc))
            return None, str(exc)
        except Exception as exc:  # pylint: disable=broad-except
            message = f"{exc.__class__.__name__}: {exc}"
            if suite.results.verbosity > 1:
                message += "\n" + tb.format_exc()
            suite.results.add_failure(
                f"{check_fn.__name__} - failed with internal error",
                message,
                internal=True,
            )
            return None, message
        suite.results.add_success(f"{check_fn.__name__} - {msg}")
        return result, msg

    return wrapper


class CheckSuite:
    """Numerical self-checks on the mesh of an experiment.

    Parameters:
        config: The experiment; its `mesh`, `electrodes`, `patterns`,
            `electrode_model`, `seed` and `check` sections are used.
        verbosity: 0 prints one symbol per check, 1 a line per check, 2 adds
            tracebacks of internal failures.
        adjoint_hook: Replacement for the adjoint under test.

    """

    def __init__(
        self,
        config: ExperimentConfig,
        verbosity: int = 0,
        adjoint_hook: Optional[AdjointHook] = None,
        console: Optional[Console] = None,
    ) -> None:
        self.config = config
        self.params = config.check
        self.adjoint_hook = adjoint_hook
        self.results = CheckResults(verbosity=verbosity)
        if console is not None:
            self.results.console = console
        self.rng = np.random.default_rng(config.seed)

    def _row(
        self,
        check: str,
        draw: int,
        quantity: str,
        value: float,
        limit: str,
        passed: bool,
    ) -> None:
        self.results.rows.append(
            CheckRow(check, draw, quantity, float(value), limit, bool(passed))
        )

    def _random_sigma(self, mesh: Mesh) -> ScalarField:
        return random_smooth_field(mesh, self.rng, 0.2, 2.0)

    def _random_z(self, mesh: Mesh) -> CellField:
        return CellField(mesh, self.rng.standard_normal(mesh.n_triangles))

    def _electrode_states(
        self, mesh: Mesh, sigma: ScalarField
    ) -> list[LinearizationState]:
        system = ElectrodeSystem(mesh, sigma, self.config.electrode_model)
        patterns = [
            fourier_pattern(n, mesh.electrode_count) for n in self.config.patterns
        ]
        return linearize(system, [system.solve(p) for p in patterns])

    def _dirichlet_states(
        self, mesh: Mesh, sigma: ScalarField
    ) -> list[LinearizationState]:
        system = DirichletSystem(mesh, sigma)
        x, y = mesh.vertices.T
        traces = [
            ScalarField(mesh, np.cos(n * np.arctan2(y, x)))
            for n in self.config.patterns
        ]
        return linearize(system, [system.solve(trace) for trace in traces])

    @check_case
    def check_forward_physics(self, mesh: Mesh) -> tuple[Any, str]:
        """Reciprocity, recovered electrode currents and grounding."""
        sigma = self._random_sigma(mesh)
        system = ElectrodeSystem(mesh, sigma, self.config.electrode_model)
        count = mesh.electrode_count
        first, second = fourier_pattern(1, count), fourier_pattern(2, count)
        u_first, u_second = system.solve(first), system.solve(second)

        reciprocity = abs(
            first.as_array() @ u_second.U - second.as_array() @ u_first.U
        ) / (np.linalg.norm(first.as_array()) * np.linalg.norm(u_second.U))
        currents = max(
            float(
                np.linalg.norm(
                    system.electrode_currents(solution) - pattern.as_array()
                )
                / np.linalg.norm(pattern.as_array())
            )
            for pattern, solution in ((first, u_first), (second, u_second))
        )
        grounding = max(
            abs(float(solution.U.sum())) / max(1.0, float(np.abs(solution.U).max()))
            for solution in (u_first, u_second)
        )
        tol = self.params.reciprocity_tol
        checks = (
            ("reciprocity", reciprocity, tol),
            ("current_recovery", currents, tol),
            ("grounding", grounding, _GROUNDING_TOL),
        )
        failed = []
        for quantity, value, limit in checks:
            passed = value <= limit
            self._row(
                "forward_physics", 0, quantity, value, f"<= {limit:g}", passed
            )
            if not passed:
                failed.append(f"{quantity} = {value:.3e} > {limit:.1e}")
        if failed:
            raise CheckFailure("; ".join(failed))
        return None, (
            f"reciprocity {reciprocity:.2e}, currents {currents:.2e}, "
            f"grounding {grounding:.2e}"
        )

    @check_case
    def check_adjoint_identity(self, mesh: Mesh, variant: str) -> tuple[Any, str]:
        """`|⟨E'τ, z⟩ − ⟨τ, E'*z⟩| ≤ tol ‖E'τ‖ ‖z‖` for random draws."""
        worst = 0.0
        for draw in range(self.params.draws):
            sigma = self._random_sigma(mesh)
            states = (
                self._electrode_states(mesh, sigma)
                if variant == "scem"
                else self._dirichlet_states(mesh, sigma)
            )
            tau = random_smooth_field(mesh, self.rng)
            z = self._random_z(mesh)
            for state in states:
                report = adjoint_identity_report(state, tau, z, self.adjoint_hook)
                passed = report.relative <= self.params.adjoint_tol
                self._row(
                    f"adjoint_{variant}",
                    draw,
                    "relative_discrepancy",
                    report.relative,
                    f"<= {self.params.adjoint_tol:g}",
                    passed,
                )
                worst = max(worst, report.relative)
        if worst > self.params.adjoint_tol:
            raise CheckFailure(
                f"{variant}: adjoint identity violated, relative discrepancy "
                f"{worst:.3e} > {self.params.adjoint_tol:.1e}"
            )
        return worst, f"{variant}: worst relative discrepancy {worst:.2e}"

    @check_case
    def check_taylor(self, mesh: Mesh) -> tuple[Any, str]:
        """Second-order Taylor remainder of the potential and the power density."""
        low, high = self.params.fd_ratio
        failures = []
        for draw in range(self.params.draws):
            sigma = self._random_sigma(mesh)
            state = self._electrode_states(mesh, sigma)[0]
            tau = random_smooth_field(mesh, self.rng)
            report = taylor_report(state, tau, self.params.fd_step)
            for quantity, ratio in (
                ("potential_ratio", report.potential_ratio),
                ("power_ratio", report.power_ratio),
            ):
                passed = low <= ratio <= high
                self._row(
                    "taylor", draw, quantity, ratio, f"in [{low:g}, {high:g}]", passed
                )
                if not passed:
                    failures.append(f"draw {draw}: {quantity} = {ratio:.3f}")
        if failures:
            raise CheckFailure(
                "Remainder ratios outside the band: " + "; ".join(failures)
            )
        return None, (
            f"{self.params.draws} draws with remainder ratios in [{low:g}, {high:g}]"
        )

    @check_case
    def check_gram(self) -> tuple[Any, str]:
        """Gram operator on the Neumann eigenfunction `cos(πx)` of the unit square."""
        report = gram_eigenfunction_report(self.params.gram_beta, self.params.gram_h)
        for draw, error in enumerate(report.errors):
            self._row("gram", draw, "relative_error", error, "decreasing", True)
        passed = report.ratio >= _GRAM_MIN_RATIO
        limit = f">= {_GRAM_MIN_RATIO:g}"
        self._row("gram", 0, "refinement_ratio", report.ratio, limit, passed)
        if not passed:
            raise CheckFailure(
                f"Gram error decreased only by {report.ratio:.2f} under refinement "
                f"(errors {report.errors[0]:.2e}, {report.errors[1]:.2e})."
            )
        return report, f"errors {report.errors[0]:.2e} -> {report.errors[1]:.2e}"

    @check_case
    def check_normal_operator(self, mesh: Mesh) -> tuple[Any, str]:
        """Symmetry and positive semi-definiteness of the normal operator."""
        sigma = self._random_sigma(mesh)
        states = self._electrode_states(mesh, sigma)
        first = random_smooth_field(mesh, self.rng)
        second = random_smooth_field(mesh, self.rng)
        image_first = apply_normal(states, first)
        image_second = apply_normal(states, second)
        cross = l2_inner(image_first, second)
        swapped = l2_inner(image_second, first)
        scale = l2_norm(image_first) * l2_norm(second) or 1.0
        asymmetry = abs(cross - swapped) / scale
        rayleigh = l2_inner(image_first, first)
        floor = -_SYMMETRY_TOL * l2_norm(image_first) * l2_norm(first)
        symmetric = asymmetry <= _SYMMETRY_TOL
        self._row(
            "normal", 0, "asymmetry", asymmetry, f"<= {_SYMMETRY_TOL:g}", symmetric
        )
        self._row("normal", 0, "rayleigh", rayleigh, ">= 0", rayleigh >= floor)
        if not symmetric or rayleigh < floor:
            raise CheckFailure(
                f"Normal operator asymmetry {asymmetry:.3e}, "
                f"⟨Mτ, τ⟩ = {rayleigh:.3e}."
            )
        return None, f"asymmetry {asymmetry:.2e}, ⟨Mτ, τ⟩ = {rayleigh:.3e}"

    @check_case
    def check_electrode_edges(self) -> tuple[Any, str]:
        """The classic electrode model concentrates more power next to the
        electrode endpoints than the smoothened one, increasingly so under
        refinement."""
        params = self.params
        layout = ElectrodeLayout(
            count=params.edge_electrodes, coverage=self.config.electrodes.coverage
        )
        report = electrode_edge_report(params.edge_radius, params.edge_h, layout)
        failed = []
        for draw, (cem, scem) in enumerate(zip(report.cem_peaks, report.scem_peaks)):
            self._row("electrode_edges", draw, "cem_peak", cem, "> scem_peak", cem > scem)
            self._row("electrode_edges", draw, "scem_peak", scem, "< cem_peak", cem > scem)
            if not cem > scem:
                failed.append(f"CEM peak {cem:.3e} <= SCEM peak {scem:.3e} at level {draw}")
        first, second = report.ratios
        growing = second > first
        self._row("electrode_edges", 1, "ratio_growth", second / first, "> 1", growing)
        if not growing:
            failed.append(f"peak ratio fell from {first:.3f} to {second:.3f}")
        if failed:
            raise CheckFailure("; ".join(failed))
        return report, f"CEM/SCEM peak ratio {first:.2f} -> {second:.2f}"

    def run(self) -> CheckResults:
        mesh = generate_mesh(self.config.mesh, self.config.electrodes)
        LOGGER.info("Running the diagnostic suite on %r.", mesh)
        dirichlet_mesh = mesh.with_boundary_labels(
            np.full(len(mesh.boundary_edges), DIRICHLET_CODE)
        )
        self.check_forward_physics(mesh)
        self.check_adjoint_identity(mesh, "scem")
        self.check_adjoint_identity(dirichlet_mesh, "dcm")
        self.check_taylor(mesh)
        self.check_gram()
        self.check_electrode_edges()
        self.check_normal_operator(mesh)
        if self.results.verbosity == 0:
            self.results.console.print()
        return self.results
