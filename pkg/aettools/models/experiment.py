import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from aettools.exceptions import ConfigurationError
from aettools.models.electrodes import ElectrodeLayout, ElectrodeModel, ScemModel
from aettools.models.lm import LmConfig
from aettools.models.noise import NoiseSpec
from aettools.models.utils import PhysicalField

__all__ = ("MeshConfig", "CheckConfig", "ExperimentConfig")


class MeshConfig(BaseModel):
    """Which domain to mesh, and how finely.

    Exactly one of `h` and `target_triangles` must be given.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    shape: Annotated[
        Literal["disk", "ellipse", "rectangle"],
        PhysicalField(description="Domain shape."),
    ] = "disk"
    radius: Annotated[
        float, PhysicalField(gt=0, description="Disk radius.", unit="m")
    ] = 0.25
    semi_axes: Annotated[
        tuple[float, float],
        PhysicalField(description="Ellipse semi-axes (major, minor).", unit="m"),
    ] = (0.09, 0.08)
    size: Annotated[
        tuple[float, float],
        PhysicalField(description="Rectangle width and height.", unit="m"),
    ] = (1.0, 1.0)
    h: Annotated[
        Optional[float],
        PhysicalField(gt=0, description="Target edge length.", unit="m"),
    ] = None
    target_triangles: Annotated[
        Optional[int],
        PhysicalField(gt=0, description="Approximate number of triangles."),
    ] = None

    @model_validator(mode="after")
    def exactly_one_resolution(self) -> "MeshConfig":
        if (self.h is None) == (self.target_triangles is None):
            raise ValueError("Give exactly one of `h` and `target_triangles`.")
        return self

    def refined(self, factor: float) -> "MeshConfig":
        """The same domain with edge lengths divided by `factor`."""
        if factor == 1:
            return self
        if self.h is not None:
            return self.model_copy(update={"h": self.h / factor})
        return self.model_copy(
            update={"target_triangles": round(self.target_triangles * factor**2)}  # type: ignore[operator]
        )


class CheckConfig(BaseModel):
    """Parameters of the diagnostic suite run by `aet check`."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    draws: Annotated[
        int, PhysicalField(ge=1, description="Random draws per randomized check.")
    ] = 10
    adjoint_tol: Annotated[
        float, PhysicalField(gt=0, description="Adjoint identity tolerance.")
    ] = 1e-8
    fd_step: Annotated[
        float, PhysicalField(gt=0, description="Largest finite-difference step.")
    ] = 1e-2
    fd_ratio: Annotated[
        tuple[float, float],
        PhysicalField(description="Accepted band of the FD residual ratio."),
    ] = (3.5, 4.5)
    reciprocity_tol: Annotated[
        float, PhysicalField(gt=0, description="Reciprocity tolerance.")
    ] = 1e-8
    gram_beta: Annotated[
        float, PhysicalField(gt=0, description="β of the Gram eigenfunction check.")
    ] = 0.05
    gram_h: Annotated[
        float,
        PhysicalField(gt=0, description="Coarse h of the Gram eigenfunction check."),
    ] = 0.05
    edge_radius: Annotated[
        float,
        PhysicalField(
            gt=0, description="Disk radius of the electrode edge check.", unit="m"
        ),
    ] = 0.25
    edge_electrodes: Annotated[
        int, PhysicalField(ge=2, description="Electrodes of the electrode edge check.")
    ] = 4
    edge_h: Annotated[
        float,
        PhysicalField(
            gt=0, description="Coarse h of the electrode edge check.", unit="m"
        ),
    ] = 0.01


class ExperimentConfig(BaseModel):
    """Everything needed to reproduce one simulate/reconstruct experiment."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: Annotated[str, PhysicalField(description="Experiment name.")] = "experiment"
    mesh: Annotated[MeshConfig, PhysicalField(description="Domain and resolution.")]
    electrodes: Annotated[
        ElectrodeLayout, PhysicalField(description="Electrode placement.")
    ] = ElectrodeLayout()
    phantom: Annotated[
        str,
        PhysicalField(
            description="Name of a shipped phantom or path to a phantom YAML file."
        ),
    ] = "heart_lung"
    patterns: Annotated[
        list[int],
        PhysicalField(min_length=1, description="Fourier pattern indices n."),
    ] = [2]
    noise: Annotated[NoiseSpec, PhysicalField(description="Data noise.")] = NoiseSpec()
    electrode_model: Annotated[
        ElectrodeModel,
        PhysicalField(description="Electrode model used for simulation and inversion."),
    ] = ScemModel()
    data_refinement: Annotated[
        float,
        PhysicalField(
            ge=1,
            description=(
                "Ratio of the inversion mesh size to the size of the mesh the data "
                "is simulated on; 1 simulates on the inversion mesh."
            ),
        ),
    ] = 1.0
    lm: Annotated[LmConfig, PhysicalField(description="LM hyperparameters.")] = (
        LmConfig()
    )
    algorithm: Annotated[
        Literal["lm-scem", "lm-dcm", "mixed"],
        PhysicalField(description="Reconstruction algorithm."),
    ] = "lm-scem"
    initial_conductivity: Annotated[
        Optional[float],
        PhysicalField(
            gt=0,
            description="Constant initial guess σ₀; the phantom background if unset.",
            unit="S/m",
        ),
    ] = None
    seed: Annotated[
        int, PhysicalField(ge=0, description="Master seed of the experiment.")
    ] = 0
    threads: Annotated[
        Optional[int],
        PhysicalField(ge=1, description="Worker threads; the runtime setting if unset."),
    ] = None
    snapshot_every: Annotated[
        int,
        PhysicalField(
            ge=0, description="Write a VTK snapshot of σ_k every n iterations (0: never)."
        ),
    ] = 0
    output_dir: Annotated[
        Path, PhysicalField(description="Directory receiving all outputs.")
    ] = Path("aet-output")
    data_dir: Annotated[
        Optional[Path],
        PhysicalField(
            description="Directory holding simulated data; `output_dir` if unset."
        ),
    ] = None
    check: Annotated[
        CheckConfig, PhysicalField(description="Diagnostic suite parameters.")
    ] = CheckConfig()

    @model_validator(mode="after")
    def patterns_fit_electrodes(self) -> "ExperimentConfig":
        count = self.electrodes.count
        for n in self.patterns:
            if n <= 0 or n >= count or n % count == 0:
                raise ValueError(
                    f"Pattern index {n} is invalid for {count} electrodes "
                    "(need 1 <= n < L)."
                )
        return self

    @property
    def resolved_data_dir(self) -> Path:
        return self.data_dir if self.data_dir is not None else self.output_dir

    @classmethod
    def from_file(
        cls, path: Union[str, Path], **overrides
    ) -> "ExperimentConfig":
        """Load an experiment from a YAML or JSON file.

        Parameters:
            path: Location of the configuration file.
            **overrides: Top-level keys replacing those found in the file.

        Raises:
            ConfigurationError: If the file is missing, unparsable or invalid.

        """
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"Configuration file {path} does not exist.")
        content = path.read_text(encoding="utf-8")
        try:
            raw = json.loads(content)
        except json.JSONDecodeError:
            try:
                raw = yaml.safe_load(content)
            except yaml.YAMLError as exc:
                raise ConfigurationError(
                    f"Unable to parse {path} as JSON or YAML: {exc}"
                ) from exc
        if not isinstance(raw, dict):
            raise ConfigurationError(f"{path} does not contain a mapping.")
        raw.update({key: value for key, value in overrides.items() if value is not None})
        try:
            return cls.model_validate(raw)
        except ValidationError as exc:
            raise ConfigurationError(f"Invalid configuration {path}:\n{exc}") from exc
