"""The simulate and reconstruct pipelines run by the `aet` subcommands.

Each `run_*` function reads an
[`ExperimentConfig`][aettools.models.experiment.ExperimentConfig], writes its
outputs into `config.output_dir` together with a manifest, and returns what
it computed so that the command line can summarize it.

Simulated data is stored as the text mesh `mesh.txt` next to
`measurements.json`, which holds the true conductivity and, per current
pattern, the currents, the electrode voltages and the noisy power density.
Floats are written in their shortest exact representation, so a
reconstruction from the stored data sees exactly the simulated values.
"""

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from rich.console import Console

from aettools.cli.checks import CheckResults, CheckSuite
from aettools.cli.manifest import effective_noise_seed, write_manifest
from aettools.exceptions import ConfigurationError
from aettools.fem.fields import CellField, ScalarField
from aettools.forward.patterns import fourier_patterns
from aettools.forward.solvers import ElectrodeSystem
from aettools.logger import LOGGER
from aettools.mesh.generators import generate_mesh
from aettools.mesh.io import read_mesh, write_mesh, write_vtk
from aettools.mesh.queries import extract_interior_submesh
from aettools.mesh.types import Mesh
from aettools.models.experiment import ExperimentConfig
from aettools.models.noise import NoiseSpec
from aettools.models.patterns import CurrentPattern
from aettools.models.phantom import PhantomSpec
from aettools.models.records import IterationRecord
from aettools.phantoms.metrics import relative_error
from aettools.phantoms.noise import realized_snr
from aettools.phantoms.specs import load_phantom_spec, true_conductivity
from aettools.reconstruction.loops import (
    IterationCallback,
    LmResult,
    compose_interior,
    lm_dcm,
    lm_scem,
    mixed_reconstruction,
)
from aettools.reconstruction.measurements import (
    Measurement,
    boundary_voltage_error,
    extract_boundary_trace,
    simulate_dcm_measurements,
    simulate_measurements,
)
from aettools.reconstruction.records import write_records_csv
from aettools.sensitivity.diagnostics import AdjointHook

__all__ = (
    "MESH_FILE",
    "MEASUREMENTS_FILE",
    "Experiment",
    "Simulation",
    "Reconstruction",
    "run_mesh",
    "run_phantom",
    "run_simulate",
    "load_simulation",
    "run_reconstruct",
    "run_check",
)

MESH_FILE = "mesh.txt"
MEASUREMENTS_FILE = "measurements.json"
_MEASUREMENTS_FORMAT = "aettools-measurements-v1"


def _output_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigurationError(
            f"Cannot create output directory {path}: {exc}"
        ) from exc
    return path


def _dump_json(data: Any, path: Path) -> Path:
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    return path


@dataclass(frozen=True, eq=False)
class Experiment:
    """The mesh, phantom, current patterns and noise of a configuration.

    `mesh` is the inversion mesh. The data is simulated on `data_mesh`, which
    is `mesh` itself unless `config.data_refinement` asks for a finer one.
    """

    config: ExperimentConfig
    mesh: Mesh
    phantom: PhantomSpec
    patterns: list[CurrentPattern]
    truth: ScalarField
    noise: NoiseSpec
    data_mesh: Mesh
    data_truth: ScalarField

    @classmethod
    def setup(cls, config: ExperimentConfig) -> "Experiment":
        mesh = generate_mesh(config.mesh, config.electrodes)
        LOGGER.info("Generated %r.", mesh)
        phantom = load_phantom_spec(config.phantom)
        truth = true_conductivity(phantom, mesh)
        if config.data_refinement == 1:
            data_mesh, data_truth = mesh, truth
        else:
            data_mesh = generate_mesh(
                config.mesh.refined(config.data_refinement), config.electrodes
            )
            LOGGER.info("Generated %r for the data.", data_mesh)
            data_truth = true_conductivity(phantom, data_mesh)
        return cls(
            config=config,
            mesh=mesh,
            phantom=phantom,
            patterns=fourier_patterns(config.patterns, config.electrodes.count),
            truth=truth,
            data_mesh=data_mesh,
            data_truth=data_truth,
            noise=config.noise.model_copy(
                update={"seed": effective_noise_seed(config)}
            ),
        )


@dataclass(frozen=True, eq=False)
class Simulation:
    """Simulated data, either freshly computed or read back from disk."""

    mesh: Mesh
    truth: ScalarField
    measurements: list[Measurement]
    clean: Optional[list[CellField]] = None


@dataclass(frozen=True, eq=False)
class Reconstruction:
    """Outcome of `aet reconstruct`."""

    result: LmResult
    summary: dict[str, Any]
    paths: list[Path] = field(default_factory=list)


def run_mesh(config: ExperimentConfig) -> tuple[Mesh, list[Path]]:
    """Generate the mesh of `config` and write it as text and as VTK."""
    out = _output_dir(config.output_dir)
    mesh = generate_mesh(config.mesh, config.electrodes)
    LOGGER.info("Generated %r.", mesh)
    labels = np.zeros(mesh.n_vertices)
    labels[mesh.boundary_edges[:, 0]] = mesh.boundary_labels
    paths = [
        write_mesh(mesh, out / MESH_FILE),
        write_vtk(
            mesh,
            out / "mesh.vtk",
            point_data={"boundary_label": labels},
            cell_data={"area": mesh.areas},
        ),
    ]
    write_manifest(out, "mesh", config, outputs=paths)
    return mesh, paths


def run_phantom(config: ExperimentConfig) -> tuple[Experiment, list[Path]]:
    """Render the true conductivity of `config` on its mesh."""
    out = _output_dir(config.output_dir)
    experiment = Experiment.setup(config)
    truth = experiment.truth
    paths = [
        write_vtk(
            experiment.mesh, out / "sigma_truth.vtk", point_data={"sigma": truth.values}
        ),
        _dump_json(
            {
                "phantom": experiment.phantom.model_dump(mode="json"),
                "sigma_truth": truth.values.tolist(),
            },
            out / "sigma_truth.json",
        ),
    ]
    write_manifest(out, "phantom", config, outputs=paths)
    return experiment, paths


def run_simulate(config: ExperimentConfig) -> tuple[Simulation, list[Path]]:
    """Simulate electrode-model power density measurements of the phantom.

    Measurement `m` is perturbed from the noise stream with seed
    `config.seed + config.noise.seed + m`.
    The power densities and electrode voltages come from a solve on the data
    mesh; the stored power densities live on the inversion mesh.
    """
    out = _output_dir(config.output_dir)
    experiment = Experiment.setup(config)
    measurements, clean = simulate_measurements(
        experiment.data_mesh,
        experiment.data_truth,
        config.electrode_model,
        experiment.patterns,
        experiment.noise,
        target=experiment.mesh,
    )

    records = []
    for m, (measurement, power) in enumerate(zip(measurements, clean)):
        pattern = measurement.pattern
        snr = realized_snr(power, measurement.E_delta)
        records.append(
            {
                "label": pattern.label,  # type: ignore[union-attr]
                "currents": list(pattern.currents),  # type: ignore[union-attr]
                "noise_seed": experiment.noise.for_pattern(m).seed,
                "snr_db": snr if math.isfinite(snr) else None,
                "U_true": measurement.U_true.tolist(),  # type: ignore[union-attr]
                "E_delta": measurement.E_delta.values.tolist(),
            }
        )

    mesh = experiment.mesh
    paths = [
        write_mesh(mesh, out / MESH_FILE),
        _dump_json(
            {
                "format": _MEASUREMENTS_FORMAT,
                "phantom": experiment.phantom.name,
                "electrode_model": config.electrode_model.model_dump(mode="json"),
                "sigma_truth": experiment.truth.values.tolist(),
                "measurements": records,
            },
            out / MEASUREMENTS_FILE,
        ),
        write_vtk(
            mesh, out / "sigma_truth.vtk", point_data={"sigma": experiment.truth.values}
        ),
        write_vtk(
            mesh,
            out / "power_density.vtk",
            cell_data={
                **{f"E_{r['label']}": p.values for r, p in zip(records, clean)},
                **{
                    f"E_delta_{r['label']}": m.E_delta.values
                    for r, m in zip(records, measurements)
                },
            },
        ),
    ]
    write_manifest(
        out,
        "simulate",
        config,
        outputs=paths,
        extra={
            "noise_streams": [r["noise_seed"] for r in records],
            "data_mesh": {
                "n_vertices": experiment.data_mesh.n_vertices,
                "n_triangles": experiment.data_mesh.n_triangles,
            },
        },
    )
    simulation = Simulation(mesh, experiment.truth, measurements, clean)
    return simulation, paths


def load_simulation(data_dir: Union[str, Path]) -> Simulation:
    """Read data written by [`run_simulate`][aettools.cli.pipelines.run_simulate].

    Raises:
        ConfigurationError: If a file is missing or malformed.

    """
    data_dir = Path(data_dir)
    mesh_path, data_path = data_dir / MESH_FILE, data_dir / MEASUREMENTS_FILE
    for path in (mesh_path, data_path):
        if not path.is_file():
            raise ConfigurationError(
                f"Simulated data file {path} does not exist; run `aet simulate` first."
            )
    mesh = read_mesh(mesh_path)
    try:
        raw = json.loads(data_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"Unable to parse {data_path}: {exc}") from exc
    if not isinstance(raw, dict) or raw.get("format") != _MEASUREMENTS_FORMAT:
        raise ConfigurationError(f"{data_path} is not an aettools measurement file.")
    try:
        truth = ScalarField(mesh, raw["sigma_truth"])
        measurements = [
            Measurement(
                E_delta=CellField(mesh, item["E_delta"]),
                pattern=CurrentPattern(
                    currents=tuple(item["currents"]), label=item["label"]
                ),
                U_true=np.asarray(item["U_true"], dtype=float),
            )
            for item in raw["measurements"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(
            f"Malformed measurement file {data_path}: {exc}"
        ) from exc
    if not measurements:
        raise ConfigurationError(f"{data_path} holds no measurements.")
    LOGGER.info("Loaded %d measurements on %r.", len(measurements), mesh)
    return Simulation(mesh, truth, measurements)


def _patterns(simulation: Simulation) -> list[CurrentPattern]:
    return [m.pattern for m in simulation.measurements if m.pattern is not None]


def _snapshot_writer(directory: Path, every: int) -> Optional[IterationCallback]:
    if every <= 0:
        return None
    folder = _output_dir(directory / "snapshots")

    def write(k: int, sigma: ScalarField, record: IterationRecord) -> None:
        if (k + 1) % every == 0:
            write_vtk(
                sigma.mesh,
                folder / f"sigma_{k:04d}.vtk",
                point_data={"sigma": sigma.values},
            )

    return write


def _standalone_dcm(
    config: ExperimentConfig,
    simulation: Simulation,
    sigma0: ScalarField,
    noise: NoiseSpec,
    callback: Optional[IterationCallback],
) -> LmResult:
    """LM-DCM on the interior domain of the simulated data.

    The boundary potentials are those of the electrode-model solutions at
    the truth; the interior power densities are continuum-model simulations
    with fresh noise. Outside the interior domain σ₀ is kept.
    """
    mesh, truth = simulation.mesh, simulation.truth
    submesh = extract_interior_submesh(mesh, config.lm.submesh_distance)
    system = ElectrodeSystem(mesh, truth, config.electrode_model)
    traces = [
        extract_boundary_trace(system.solve(pattern).u, submesh)
        for pattern in _patterns(simulation)
    ]
    interior = simulate_dcm_measurements(
        truth.restrict(submesh),
        traces,
        noise,
        stream_offset=len(simulation.measurements),
    )

    composite_callback = None
    if callback is not None:

        def composite_callback(k: int, sigma: ScalarField, record: IterationRecord):
            callback(k, compose_interior(sigma0, sigma, submesh), record)

    result = lm_dcm(
        config.lm,
        submesh.mesh,
        interior,
        sigma0.restrict(submesh),
        truth.restrict(submesh),
        threads=config.threads,
        callback=composite_callback,
    )
    return LmResult(
        sigma=compose_interior(sigma0, result.sigma, submesh),
        records=result.records,
        stop_reason=result.stop_reason,
    )


def _final_eta_b(
    config: ExperimentConfig, simulation: Simulation, sigma: ScalarField
) -> list[float]:
    system = ElectrodeSystem(simulation.mesh, sigma, config.electrode_model)
    return [
        boundary_voltage_error(m.U_true, system.solve(m.pattern).U)
        for m in simulation.measurements
        if m.U_true is not None and m.pattern is not None
    ]


def run_reconstruct(config: ExperimentConfig) -> Reconstruction:
    """Reconstruct σ from the data in `config.resolved_data_dir` with the
    algorithm selected by `config.algorithm`."""
    simulation = load_simulation(config.resolved_data_dir)
    out = _output_dir(config.output_dir)
    mesh, truth = simulation.mesh, simulation.truth
    if config.initial_conductivity is not None:
        initial = config.initial_conductivity
    else:
        initial = load_phantom_spec(config.phantom).background
    sigma0 = ScalarField.constant(mesh, initial)
    noise = config.noise.model_copy(update={"seed": effective_noise_seed(config)})
    callback = _snapshot_writer(out, config.snapshot_every)

    LOGGER.info(
        "Reconstructing with %s from %d measurements, σ₀ = %g.",
        config.algorithm,
        len(simulation.measurements),
        initial,
    )
    start = time.perf_counter()
    result: LmResult
    if config.algorithm == "lm-scem":
        result = lm_scem(
            config.lm,
            mesh,
            simulation.measurements,
            sigma0,
            truth,
            config.electrode_model,
            threads=config.threads,
            callback=callback,
        )
    elif config.algorithm == "mixed":
        result = mixed_reconstruction(
            config.lm,
            mesh,
            simulation.measurements,
            sigma0,
            truth,
            config.electrode_model,
            noise=noise,
            threads=config.threads,
            callback=callback,
        )
    else:
        result = _standalone_dcm(config, simulation, sigma0, noise, callback)
    wall_time = time.perf_counter() - start

    summary = {
        "algorithm": config.algorithm,
        "iterations": len(result.records),
        "stop_reason": result.stop_reason,
        "initial_eta": relative_error(truth, sigma0),
        "final_eta": relative_error(truth, result.sigma),
        "final_eta_b": _final_eta_b(config, simulation, result.sigma),
        "alpha_final": result.records[-1].alpha if result.records else None,
        "iteration_wall_time": sum(record.wall_time for record in result.records),
        "wall_time": wall_time,
        "n_vertices": mesh.n_vertices,
        "n_triangles": mesh.n_triangles,
    }
    paths = [
        write_vtk(
            mesh,
            out / "sigma_recon.vtk",
            point_data={
                "sigma_recon": result.sigma.values,
                "sigma_truth": truth.values,
                "sigma_initial": sigma0.values,
                "abs_error": np.abs(result.sigma.values - truth.values),
            },
        ),
        _dump_json(
            {"sigma_recon": result.sigma.values.tolist()}, out / "reconstruction.json"
        ),
        write_records_csv(result.records, out / "records.csv"),
        _dump_json(summary, out / "summary.json"),
    ]
    data_dir = config.resolved_data_dir
    write_manifest(
        out,
        "reconstruct",
        config,
        inputs=[data_dir / MESH_FILE, data_dir / MEASUREMENTS_FILE],
        outputs=paths,
    )
    LOGGER.info(
        "Finished after %d iterations (%s): η = %.4f.",
        summary["iterations"],
        summary["stop_reason"],
        summary["final_eta"],
    )
    return Reconstruction(result, summary, paths)


def run_check(
    config: ExperimentConfig,
    verbosity: int = 0,
    adjoint_hook: Optional[AdjointHook] = None,
    console: Optional[Console] = None,
) -> tuple[CheckResults, list[Path]]:
    """Run the diagnostic suite and write `checks.csv`."""
    out = _output_dir(config.output_dir)
    suite = CheckSuite(config, verbosity, adjoint_hook, console)
    results = suite.run()
    paths = [results.write_csv(out / "checks.csv")]
    write_manifest(
        out,
        "check",
        config,
        outputs=paths,
        extra={"adjoint_under_test": "hook" if adjoint_hook else "adjoint"},
    )
    return results, paths
