# pylint: disable=redefined-outer-name
import json

import numpy as np
import pytest

from aettools.cli.main import CONFIG_DIR
from aettools.cli.manifest import (
    MANIFEST_NAME,
    effective_noise_seed,
    file_sha256,
    write_manifest,
)
from aettools.cli.pipelines import (
    load_simulation,
    run_mesh,
    run_reconstruct,
    run_simulate,
)
from aettools.exceptions import ConfigurationError
from aettools.mesh.io import read_mesh
from aettools.models.experiment import ExperimentConfig


@pytest.fixture
def small_config(experiment_yaml):
    return ExperimentConfig.from_file(experiment_yaml())


def test_file_sha256(tmp_path):
    path = tmp_path / "data.txt"
    path.write_bytes(b"abc")
    assert file_sha256(path) == (
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    )


def test_effective_noise_seed(small_config):
    config = small_config.model_copy(
        update={"seed": 7, "noise": small_config.noise.model_copy(update={"seed": 3})}
    )
    assert effective_noise_seed(config) == 10


def test_manifest_contents(small_config, tmp_path):
    output = tmp_path / "result.txt"
    output.write_text("result\n", encoding="utf-8")
    path = write_manifest(
        tmp_path, "mesh", small_config, outputs=[output], extra={"note": "extra"}
    )
    assert path.name == MANIFEST_NAME
    manifest = json.loads(path.read_text(encoding="utf-8"))
    assert manifest["command"] == "mesh"
    assert manifest["outputs"] == {"result.txt": file_sha256(output)}
    assert manifest["inputs"] == {}
    assert manifest["seeds"] == {"experiment": 0, "noise": 0}
    assert manifest["config"]["name"] == "small-heart-lung"
    assert manifest["note"] == "extra"
    assert "timestamp" not in manifest


def test_manifest_is_reproducible(small_config, tmp_path):
    first = write_manifest(tmp_path, "mesh", small_config).read_bytes()
    second = write_manifest(tmp_path, "mesh", small_config).read_bytes()
    assert first == second


def test_run_mesh_roundtrip(small_config):
    mesh, paths = run_mesh(small_config)
    assert {path.name for path in paths} == {"mesh.txt", "mesh.vtk"}
    loaded = read_mesh(small_config.output_dir / "mesh.txt")
    np.testing.assert_array_equal(loaded.triangles, mesh.triangles)
    assert loaded.electrode_count == 16


def test_load_simulation(small_config):
    simulation, _ = run_simulate(small_config)
    loaded = load_simulation(small_config.output_dir)
    assert len(loaded.measurements) == len(simulation.measurements) == 2
    np.testing.assert_allclose(loaded.truth.values, simulation.truth.values)
    for original, read in zip(simulation.measurements, loaded.measurements):
        np.testing.assert_allclose(read.E_delta.values, original.E_delta.values)
        assert read.pattern.currents == pytest.approx(original.pattern.currents)
        assert read.label == original.label
    assert loaded.clean is None


def test_load_simulation_missing(tmp_path):
    with pytest.raises(ConfigurationError, match="does not exist"):
        load_simulation(tmp_path)


def test_load_simulation_wrong_format(small_config):
    run_simulate(small_config)
    path = small_config.output_dir / "measurements.json"
    path.write_text(json.dumps({"format": "something-else"}), encoding="utf-8")
    with pytest.raises(ConfigurationError, match="not an aettools measurement file"):
        load_simulation(small_config.output_dir)

    path.write_text("{ not json", encoding="utf-8")
    with pytest.raises(ConfigurationError, match="Unable to parse"):
        load_simulation(small_config.output_dir)


def test_snapshots(small_config):
    config = small_config.model_copy(update={"snapshot_every": 1})
    run_simulate(config)
    outcome = run_reconstruct(config)
    snapshots = sorted((config.output_dir / "snapshots").glob("sigma_*.vtk"))
    assert len(snapshots) == len(outcome.result.records)


@pytest.mark.slow
@pytest.mark.parametrize("name", ["heart_lung", "brain"])
def test_shipped_experiment(name, tmp_path):
    """Full-size shipped experiments improve on the initial guess."""
    config = ExperimentConfig.from_file(
        CONFIG_DIR / f"{name}.yml", output_dir=tmp_path
    )
    run_simulate(config)
    outcome = run_reconstruct(config)
    summary = outcome.summary
    assert summary["final_eta"] < summary["initial_eta"]
    assert summary["iterations"] >= 1
    assert outcome.paths


def test_data_on_a_finer_mesh(small_config, tmp_path):
    coarse, _ = run_simulate(small_config)
    config = small_config.model_copy(
        update={"data_refinement": 1.5, "output_dir": tmp_path / "refined"}
    )
    refined, _ = run_simulate(config)
    loaded = load_simulation(config.output_dir)
    assert loaded.mesh.n_triangles == coarse.mesh.n_triangles
    for fine, same in zip(refined.measurements, coarse.measurements):
        assert fine.mesh is refined.mesh
        assert not np.allclose(fine.E_delta.values, same.E_delta.values)
    manifest = json.loads((config.output_dir / MANIFEST_NAME).read_text("utf-8"))
    assert manifest["data_mesh"]["n_triangles"] > 1.5 * coarse.mesh.n_triangles
