import pytest

SMALL_EXPERIMENT = """\
name: small-heart-lung
phantom: heart_lung
mesh:
  shape: disk
  radius: 0.25
  h: 0.02
electrodes:
  count: 16
  coverage: 0.5
patterns: [1, 2]
noise:
  snr_db: 60.0
  seed: 0
electrode_model:
  kind: scem
  peak: 1.0
algorithm: lm-scem
initial_conductivity: 0.22
seed: 0
output_dir: {out}
lm:
  alpha0: 50.0
  decay: 1.2
  beta: 1.2e-3
  known_width: 0.045
  step_tol: 1.0e-4
  max_iter: {max_iter}
"""

SMALL_CHECK = """\
name: small-check
mesh:
  shape: disk
  radius: 1.0
  h: 0.2
electrodes:
  count: 8
patterns: [1, 2]
seed: 0
output_dir: {out}
check:
  draws: 2
  gram_beta: 0.05
  gram_h: 0.1
"""


@pytest.fixture
def experiment_yaml(tmp_path):
    """Write a small heart-lung experiment and return its path."""

    def write(max_iter: int = 2, name: str = "experiment.yml"):
        path = tmp_path / name
        path.write_text(
            SMALL_EXPERIMENT.format(out=tmp_path / "run", max_iter=max_iter),
            encoding="utf-8",
        )
        return path

    return write


@pytest.fixture
def check_yaml(tmp_path):
    """Path of a coarse configuration for the diagnostic suite."""
    path = tmp_path / "check.yml"
    path.write_text(SMALL_CHECK.format(out=tmp_path / "check"), encoding="utf-8")
    return path


@pytest.fixture
def runner():
    from click.testing import CliRunner

    return CliRunner()
