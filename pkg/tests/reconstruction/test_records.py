import pytest

from aettools.exceptions import ConfigurationError
from aettools.models.records import IterationRecord
from aettools.reconstruction.records import (
    RECORD_COLUMNS,
    read_records_csv,
    write_records_csv,
)


def test_records_survive_csv(tmp_path):
    records = [
        IterationRecord(
            k=0,
            phase="lm-scem",
            alpha=50.0,
            step_norm=0.125,
            step_residual=3.1e-9,
            misfit=1.0 / 3.0,
            eta=0.2,
            eta_b=(0.1, 0.05),
            wall_time=1.5,
        ),
        IterationRecord(
            k=1,
            phase="lm-dcm",
            alpha=25.0,
            step_norm=0.0,
            step_residual=0.0,
            misfit=0.01,
            clamped=3,
            flags=("clamped", "inner-inaccurate"),
        ),
    ]
    path = write_records_csv(records, tmp_path / "records.csv")
    header = path.read_text().splitlines()[0]
    assert header.split(",") == list(RECORD_COLUMNS)
    assert read_records_csv(path) == records


def test_invalid_records(tmp_path):
    with pytest.raises(ConfigurationError, match="does not exist"):
        read_records_csv(tmp_path / "missing.csv")

    path = tmp_path / "records.csv"
    path.write_text(",".join(RECORD_COLUMNS) + "\n" + "-1,lm-scem,1.0,0,0,0,,,0,0,\n")
    with pytest.raises(ConfigurationError, match="line 2"):
        read_records_csv(path)
