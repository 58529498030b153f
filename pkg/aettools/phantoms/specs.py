"""Built-in and user-supplied conductivity phantoms.

Phantom geometries live in versioned YAML files. The built-in ones ship in
the `data` directory next to this module and are addressed by name; any
other phantom is addressed by the path of its file.
"""

from pathlib import Path
from typing import TYPE_CHECKING, Union

import numpy as np
import yaml
from pydantic import ValidationError

from aettools.exceptions import ConfigurationError
from aettools.fem.fields import CellField, ScalarField
from aettools.logger import LOGGER
from aettools.mesh.queries import subcell_points
from aettools.models.phantom import PhantomSpec
from aettools.phantoms.mollifier import mollify

if TYPE_CHECKING:  # pragma: no cover
    from aettools.mesh.types import Mesh

__all__ = (
    "PHANTOM_DATA_DIR",
    "builtin_phantoms",
    "load_phantom_spec",
    "heart_lung_phantom",
    "brain_phantom",
    "render_nodes",
    "render_cells",
    "true_conductivity",
)

PHANTOM_DATA_DIR = Path(__file__).parent / "data"


def builtin_phantoms() -> list[str]:
    return sorted(path.stem for path in PHANTOM_DATA_DIR.glob("*.yml"))


def load_phantom_spec(name_or_path: Union[str, Path]) -> PhantomSpec:
    """Load a phantom by built-in name (`heart_lung`, `brain`) or file path.

    Raises:
        ConfigurationError: If the phantom cannot be found or is invalid.

    """
    path = Path(name_or_path)
    if not path.is_file():
        builtin = PHANTOM_DATA_DIR / f"{str(name_or_path).replace('-', '_')}.yml"
        if not builtin.is_file():
            raise ConfigurationError(
                f"Unknown phantom {str(name_or_path)!r}; built-in phantoms are "
                f"{', '.join(builtin_phantoms())}."
            )
        path = builtin
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"Unable to parse phantom file {path}: {exc}") from exc
    try:
        spec = PhantomSpec.model_validate(raw)
    except ValidationError as exc:
        raise ConfigurationError(f"Invalid phantom file {path}:\n{exc}") from exc
    LOGGER.debug("Loaded phantom %r v%d from %s.", spec.name, spec.version, path)
    return spec


def render_nodes(spec: PhantomSpec, mesh: "Mesh") -> ScalarField:
    """The unmollified phantom sampled at the mesh vertices."""
    return ScalarField(mesh, spec.evaluate(mesh.vertices))


def render_cells(spec: PhantomSpec, mesh: "Mesh") -> CellField:
    """Triangle averages of the unmollified phantom.

    Each triangle is sampled at the centroids of its four midpoint
    sub-triangles, so triangles cut by a region boundary get a blended value.
    """
    points = subcell_points(mesh)
    values = spec.evaluate(points.reshape(-1, 2)).reshape(points.shape[:2])
    return CellField(mesh, values.mean(axis=1))


def true_conductivity(spec: PhantomSpec, mesh: "Mesh") -> ScalarField:
    """The phantom mollified with its own radius `spec.epsilon`.

    A zero radius returns the nodal samples of the phantom.
    """
    if spec.epsilon == 0:
        return render_nodes(spec, mesh)
    return mollify(render_cells(spec, mesh), spec.epsilon)


def heart_lung_phantom(mesh: "Mesh") -> ScalarField:
    """Piecewise-constant heart-lung phantom at the vertices of `mesh`."""
    return render_nodes(load_phantom_spec("heart_lung"), mesh)


def brain_phantom(mesh: "Mesh") -> ScalarField:
    """Piecewise-constant layered brain phantom at the vertices of `mesh`."""
    return render_nodes(load_phantom_spec("brain"), mesh)
