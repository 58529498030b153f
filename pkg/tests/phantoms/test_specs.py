import numpy as np
import pytest
from pydantic import ValidationError

from aettools.exceptions import ConfigurationError
from aettools.models.phantom import CircleRegion, PhantomSpec, PolygonRegion
from aettools.phantoms.specs import (
    brain_phantom,
    builtin_phantoms,
    heart_lung_phantom,
    load_phantom_spec,
    render_cells,
    true_conductivity,
)


def test_builtin_phantoms():
    assert builtin_phantoms() == ["brain", "heart_lung"]
    assert load_phantom_spec("heart-lung").name == "heart_lung"


def test_heart_lung_geometry():
    spec = load_phantom_spec("heart_lung")
    points = np.array([[0.0, -0.04], [-0.09, 0.01], [0.0, 0.12], [0.2, 0.1]])
    np.testing.assert_allclose(spec.evaluate(points), [0.7, 0.26, 0.33, 0.22])
    assert spec.conductivities == [0.22, 0.33, 0.26, 0.26, 0.7]
    assert spec.epsilon == 0.01


def test_brain_layers():
    spec = load_phantom_spec("brain")
    radii = [0.0, 0.05, 0.0585, 0.0625, 0.0675, 0.08]
    along_x = spec.evaluate(np.column_stack((radii, np.zeros(6))))
    np.testing.assert_allclose(
        along_x, [0.3240, 0.5595, 2.1143, 0.2923, 0.5232, 0.4]
    )


def test_unknown_and_invalid_phantoms(tmp_path):
    with pytest.raises(ConfigurationError, match="Unknown phantom"):
        load_phantom_spec("kidney")

    broken = tmp_path / "broken.yml"
    broken.write_text("name: [unclosed\n")
    with pytest.raises(ConfigurationError, match="Unable to parse"):
        load_phantom_spec(broken)

    outside = tmp_path / "outside.yml"
    outside.write_text(
        "name: outside\ndomain_semi_axes: [1.0, 1.0]\nbackground: 1.0\n"
        "regions:\n  - kind: circle\n    name: blob\n    centre: [0.8, 0.0]\n"
        "    radius: 0.5\n    conductivity: 2.0\n"
    )
    with pytest.raises(ConfigurationError, match="leaves the domain"):
        load_phantom_spec(outside)


def test_regions_paint_in_order():
    spec = PhantomSpec(
        name="layers",
        domain_semi_axes=(1.0, 1.0),
        background=1.0,
        regions=[
            CircleRegion(name="outer", centre=(0.0, 0.0), radius=0.5, conductivity=2.0),
            PolygonRegion(
                name="square",
                vertices=[(-0.1, -0.1), (0.1, -0.1), (0.1, 0.1), (-0.1, 0.1)],
                conductivity=3.0,
            ),
        ],
    )
    values = spec.evaluate(np.array([[0.0, 0.0], [0.3, 0.0], [0.7, 0.0]]))
    np.testing.assert_array_equal(values, [3.0, 2.0, 1.0])
    with pytest.raises(ValidationError):
        CircleRegion(name="bad", centre=(0.0, 0.0), radius=0.1, conductivity=0.0)


def test_true_conductivity(thorax_mesh):
    spec = load_phantom_spec("heart_lung")
    sigma = true_conductivity(spec, thorax_mesh)
    assert sigma.min() >= 0.22 - 1e-12
    assert sigma.max() <= 0.7 + 1e-12
    # smoothing produces values that no region carries
    assert not np.all(np.isin(np.round(sigma.values, 12), spec.conductivities))

    cells = render_cells(spec, thorax_mesh)
    assert cells.min() >= 0.22 - 1e-12
    assert cells.max() <= 0.7 + 1e-12


def test_piecewise_constant_phantoms(thorax_mesh):
    values = heart_lung_phantom(thorax_mesh).values
    assert set(np.unique(values)) <= {0.22, 0.33, 0.26, 0.7}
    assert brain_phantom(thorax_mesh).mesh is thorax_mesh
