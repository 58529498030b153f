"""The `aet` command line: experiment pipelines and the diagnostic suite."""

import functools
import sys
from pathlib import Path
from typing import Any, Callable, Optional

import click
import numpy as np
from rich.console import Console
from rich.table import Table

from aettools import __version__
from aettools.cli.checks import CheckResults, flipped_adjoint
from aettools.cli.pipelines import (
    Reconstruction,
    run_check,
    run_mesh,
    run_phantom,
    run_reconstruct,
    run_simulate,
)
from aettools.exceptions import AetException, CheckFailure, ConfigurationError
from aettools.logger import set_verbosity
from aettools.models.experiment import ExperimentConfig

__all__ = ("aet", "CONFIG_DIR", "resolve_config")

CONFIG_DIR = Path(__file__).parent / "configs"
_DEFAULT_CONFIG = "heart_lung"
_CHECK_CONFIG = "check"

console = Console(highlight=False)


def resolve_config(name_or_path: Optional[str], default: str) -> Path:
    """Path of a configuration file, or of a shipped configuration by name."""
    if name_or_path is None:
        return CONFIG_DIR / f"{default}.yml"
    path = Path(name_or_path)
    if path.is_file():
        return path
    shipped = CONFIG_DIR / f"{name_or_path.replace('-', '_')}.yml"
    if shipped.is_file():
        return shipped
    raise ConfigurationError(f"Configuration file {name_or_path} does not exist.")


def _load(
    config: Optional[str],
    default: str,
    out: Optional[Path] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    **overrides,
) -> ExperimentConfig:
    return ExperimentConfig.from_file(
        resolve_config(config, default),
        output_dir=out,
        seed=seed,
        threads=threads,
        **overrides,
    )


def _handle_errors(func: Callable[..., Any]) -> Callable[..., Any]:
    """Map package exceptions to their exit codes, anything else to 1."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except AetException as exc:
            console.print(f"[bold red]{exc.title}:[/] {exc}")
            raise SystemExit(exc.exit_code) from exc
        except (click.exceptions.Exit, click.ClickException, SystemExit):
            raise
        except Exception as exc:  # pylint: disable=broad-except
            console.print_exception()
            raise SystemExit(1) from exc

    return wrapper


def _common_options(func: Callable[..., Any]) -> Callable[..., Any]:
    for option in reversed(
        (
            click.option(
                "--config",
                "config",
                default=None,
                help=(
                    "Experiment configuration (YAML or JSON), "
                    "or the name of a shipped one."
                ),
            ),
            click.option(
                "--out",
                type=click.Path(file_okay=False, path_type=Path),
                default=None,
                help="Output directory, overriding `output_dir` of the configuration.",
            ),
            click.option("--seed", type=int, default=None, help="Master seed."),
            click.option(
                "--threads",
                type=click.IntRange(min=1),
                default=None,
                help="Worker threads for per-measurement solves.",
            ),
        )
    ):
        func = option(func)
    return func


@click.group("aet")
@click.version_option(__version__, prog_name="aet, acousto-electric tomography tools")
@click.option(
    "-v", "--verbose", count=True, help="Increase the logging verbosity (-v, -vv)."
)
@click.pass_context
def aet(ctx: click.Context, verbose: int) -> None:
    """Simulate and reconstruct acousto-electric tomography experiments."""
    ctx.ensure_object(dict)
    ctx.obj["verbosity"] = verbose
    set_verbosity(verbose)


def _print_paths(paths) -> None:
    for path in paths:
        console.print(f"  [green]wrote[/] {path}")


@aet.command()
@_common_options
@_handle_errors
def mesh(config, out, seed, threads) -> None:
    """Generate the mesh only."""
    experiment = _load(config, _DEFAULT_CONFIG, out, seed, threads)
    generated, paths = run_mesh(experiment)
    console.print(
        f"Mesh with {generated.n_vertices} vertices, {generated.n_triangles} "
        f"triangles and {generated.electrode_count} electrodes "
        f"(h = {generated.characteristic_h:.4g} m)."
    )
    _print_paths(paths)


@aet.command()
@_common_options
@_handle_errors
def phantom(config, out, seed, threads) -> None:
    """Render the true conductivity only."""
    experiment_config = _load(config, _DEFAULT_CONFIG, out, seed, threads)
    experiment, paths = run_phantom(experiment_config)
    truth = experiment.truth
    console.print(
        f"Phantom {experiment.phantom.name!r}: σ in "
        f"[{truth.min():.4g}, {truth.max():.4g}] S/m on {experiment.mesh.n_vertices} "
        "vertices."
    )
    _print_paths(paths)


@aet.command()
@_common_options
@_handle_errors
def simulate(config, out, seed, threads) -> None:
    """Simulate noisy power density measurements of the phantom."""
    experiment_config = _load(config, _DEFAULT_CONFIG, out, seed, threads)
    simulation, paths = run_simulate(experiment_config)

    table = Table(title=f"Simulated data ({experiment_config.name})")
    for column in ("pattern", "‖U‖", "max E", "min E^δ"):
        table.add_column(column, justify="right")
    for measurement in simulation.measurements:
        table.add_row(
            measurement.label,
            f"{np.linalg.norm(measurement.U_true):.4e}",
            f"{measurement.E_delta.max():.4e}",
            f"{measurement.E_delta.min():.4e}",
        )
    console.print(table)
    _print_paths(paths)


def _summary_table(outcome: Reconstruction) -> Table:
    table = Table(title="Reconstruction")
    for column in ("k", "phase", "α", "‖τ‖", "misfit", "η", "flags"):
        table.add_column(column, justify="right")
    for record in outcome.result.records:
        table.add_row(
            str(record.k),
            record.phase,
            f"{record.alpha:.3g}",
            f"{record.step_norm:.3e}",
            f"{record.misfit:.3e}",
            "" if record.eta is None else f"{record.eta:.4f}",
            ", ".join(record.flags),
        )
    return table


@aet.command()
@_common_options
@click.option(
    "--data",
    "data_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Directory holding the simulated data; the output directory by default.",
)
@click.option(
    "--snapshot-every",
    type=click.IntRange(min=0),
    default=None,
    help="Write a VTK snapshot of σ every N iterations.",
)
@_handle_errors
def reconstruct(config, out, seed, threads, data_dir, snapshot_every) -> None:
    """Reconstruct the conductivity from simulated data."""
    experiment_config = _load(
        config,
        _DEFAULT_CONFIG,
        out,
        seed,
        threads,
        data_dir=data_dir,
        snapshot_every=snapshot_every,
    )
    outcome = run_reconstruct(experiment_config)
    summary = outcome.summary
    console.print(_summary_table(outcome))
    eta_b = ", ".join(f"{value:.2e}" for value in summary["final_eta_b"])
    console.print(
        f"{summary['algorithm']}: {summary['iterations']} iterations "
        f"({summary['stop_reason']}), η = {summary['final_eta']:.4f} "
        f"(σ₀: {summary['initial_eta']:.4f}), η^b = [{eta_b}], "
        f"{summary['wall_time']:.1f} s."
    )
    _print_paths(outcome.paths)


def _check_table(results: CheckResults) -> Table:
    table = Table(title="Diagnostic checks")
    for column in ("check", "draw", "quantity", "value", "limit", "pass"):
        table.add_column(column, justify="right")
    for row in results.rows:
        table.add_row(
            row.check,
            str(row.draw),
            row.quantity,
            f"{row.value:.3e}",
            row.limit,
            "[green]✔[/]" if row.passed else "[red]✖[/]",
        )
    return table


@aet.command()
@_common_options
@click.option("--corrupt-adjoint", is_flag=True, hidden=True)
@click.pass_context
@_handle_errors
def check(ctx, config, out, seed, threads, corrupt_adjoint) -> None:
    """Run the numerical self-checks and report the measured discrepancies."""
    experiment_config = _load(config, _CHECK_CONFIG, out, seed, threads)
    verbosity = ctx.obj.get("verbosity", 0) if ctx.obj else 0
    results, paths = run_check(
        experiment_config,
        verbosity=verbosity,
        adjoint_hook=flipped_adjoint if corrupt_adjoint else None,
        console=console,
    )
    console.print(_check_table(results))
    failures = results.failure_messages + results.internal_failure_messages
    for summary, message in failures:
        console.print(f"[bold red]{summary}[/]: {message}")
    console.print(
        f"{results.success_count} passed, {results.failure_count} failed, "
        f"{results.internal_failure_count} errored."
    )
    _print_paths(paths)
    if not results.passed:
        raise CheckFailure(
            f"{results.failure_count + results.internal_failure_count} check(s) failed."
        )


def main() -> None:
    aet(obj={})


if __name__ == "__main__":
    sys.exit(main())
