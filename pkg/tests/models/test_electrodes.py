import math

import pytest
from pydantic import ValidationError

from aettools.models.electrodes import CemModel, ElectrodeLayout, ScemModel


def test_uniform_layout():
    layout = ElectrodeLayout(count=4, coverage=0.5)
    arcs = layout.arcs
    assert len(arcs) == 4
    for l, (start, end) in enumerate(arcs, start=1):
        assert end - start == pytest.approx(math.pi / 4)
    assert layout.centres == pytest.approx([math.pi / 2, math.pi, 3 * math.pi / 2, 2 * math.pi])


def test_custom_arcs():
    arcs = [(0.0, 0.5), (2.0, 2.5), (4.0, 4.5)]
    layout = ElectrodeLayout(count=3, custom_arcs=arcs)
    assert layout.arcs == arcs
    assert layout.centres == pytest.approx([0.25, 2.25, 4.25])


@pytest.mark.parametrize(
    "arcs, match",
    [
        ([(0.0, 0.5), (2.0, 2.5)], "3 electrodes"),
        ([(0.0, 0.5), (2.0, 2.6), (4.0, 4.5)], "same angle"),
        ([(0.0, 0.5), (0.4, 0.9), (4.0, 4.5)], "overlap"),
        ([(0.0, -0.5), (2.0, 1.5), (4.0, 3.5)], "end - start"),
    ],
)
def test_invalid_custom_arcs(arcs, match):
    with pytest.raises(ValidationError, match=match):
        ElectrodeLayout(count=3, custom_arcs=arcs)


def test_electrode_models():
    assert ScemModel().peak == 1.0
    assert CemModel().impedance == 2.0
    with pytest.raises(ValidationError):
        ScemModel(peak=0.0)
    with pytest.raises(ValidationError):
        CemModel(impedance=-1.0)
    with pytest.raises(ValidationError):
        ElectrodeLayout(coverage=1.5)
