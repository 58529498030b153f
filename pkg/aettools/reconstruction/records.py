import csv
from collections.abc import Iterable
from pathlib import Path
from typing import Union

from pydantic import ValidationError

from aettools.exceptions import ConfigurationError
from aettools.models.records import IterationRecord

__all__ = ("RECORD_COLUMNS", "write_records_csv", "read_records_csv")

RECORD_COLUMNS = tuple(IterationRecord.model_fields)

_SEPARATOR = ";"


def _row(record: IterationRecord) -> dict[str, str]:
    row = {}
    for name, value in record.model_dump().items():
        if isinstance(value, (tuple, list)):
            row[name] = _SEPARATOR.join(
                repr(v) if isinstance(v, float) else str(v) for v in value
            )
        elif value is None:
            row[name] = ""
        elif isinstance(value, float):
            row[name] = repr(value)
        else:
            row[name] = str(value)
    return row


def write_records_csv(
    records: Iterable[IterationRecord], path: Union[str, Path]
) -> Path:
    """Write one row per iteration; tuple-valued columns are `;`-separated."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=RECORD_COLUMNS)
        writer.writeheader()
        for record in records:
            writer.writerow(_row(record))
    return path


def read_records_csv(path: Union[str, Path]) -> list[IterationRecord]:
    """Read records written by
    [`write_records_csv`][aettools.reconstruction.records.write_records_csv].

    Raises:
        ConfigurationError: If the file is missing or malformed.

    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Records file {path} does not exist.")
    records = []
    with open(path, newline="", encoding="utf-8") as handle:
        for line, row in enumerate(csv.DictReader(handle), start=2):
            data: dict = dict(row)
            data["eta"] = data.get("eta") or None
            for name in ("eta_b", "flags"):
                value = data.get(name) or ""
                data[name] = tuple(value.split(_SEPARATOR)) if value else ()
            try:
                records.append(IterationRecord.model_validate(data))
            except ValidationError as exc:
                raise ConfigurationError(f"{path}, line {line}: {exc}") from exc
    return records
