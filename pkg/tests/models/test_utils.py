from typing import Annotated

import pytest
from pydantic import BaseModel

from aettools.models.utils import UNIT_SCHEMA_KEY, PhysicalField


def test_unit_is_recorded_in_schema():
    class Electrode(BaseModel):
        length: Annotated[float, PhysicalField(description="A length.", unit="m")] = 1.0
        count: Annotated[int, PhysicalField(description="A count.")] = 0

    schema = Electrode.model_json_schema()["properties"]
    assert schema["length"][UNIT_SCHEMA_KEY] == "m"
    assert UNIT_SCHEMA_KEY not in schema["count"]
    assert schema["count"]["description"] == "A count."


def test_missing_description_warns():
    with pytest.warns(UserWarning, match="No description"):
        PhysicalField(1.0)


def test_forbidden_keywords():
    with pytest.raises(RuntimeError, match="forbidden keywords"):
        PhysicalField(1.0, description="x", queryable=True)
