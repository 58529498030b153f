"""Reproducibility manifests written next to every command's outputs."""

import hashlib
import json
import platform
from collections.abc import Iterable
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import scipy

from aettools import __version__
from aettools.logger import LOGGER
from aettools.models.experiment import ExperimentConfig

__all__ = ("MANIFEST_NAME", "file_sha256", "effective_noise_seed", "write_manifest")

MANIFEST_NAME = "manifest.json"

_CHUNK = 1 << 20


def file_sha256(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(_CHUNK), b""):
            digest.update(chunk)
    return digest.hexdigest()


def effective_noise_seed(config: ExperimentConfig) -> int:
    """Seed of the first noise stream; measurement `m` uses this seed plus `m`."""
    return config.seed + config.noise.seed


def _digests(paths: Iterable[Path], root: Path) -> dict[str, str]:
    digests = {}
    for path in paths:
        path = Path(path)
        if not path.is_file():
            continue
        try:
            name = str(path.resolve().relative_to(root.resolve()))
        except ValueError:
            name = str(path)
        digests[name] = file_sha256(path)
    return dict(sorted(digests.items()))


def write_manifest(
    directory: Union[str, Path],
    command: str,
    config: ExperimentConfig,
    inputs: Iterable[Path] = (),
    outputs: Iterable[Path] = (),
    extra: Optional[dict[str, Any]] = None,
) -> Path:
    """Write `manifest.json` into `directory`.

    The manifest holds the fully resolved configuration, the seeds that were
    used, the package and numerical library versions, and the SHA-256 digest
    of every input and output file. It carries no timestamp, so that
    repeating a run reproduces it byte for byte.

    Parameters:
        directory: Output directory of the command.
        command: Name of the subcommand that produced the outputs.
        config: The configuration the command ran with.
        inputs: Files read by the command.
        outputs: Files written by the command.
        extra: Additional entries, e.g. the noise stream of every measurement.

    Returns:
        The path of the manifest.

    """
    directory = Path(directory)
    manifest = {
        "command": command,
        "aettools_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "config": config.model_dump(mode="json"),
        "seeds": {
            "experiment": config.seed,
            "noise": effective_noise_seed(config),
        },
        "inputs": _digests(inputs, directory),
        "outputs": _digests(outputs, directory),
    }
    if extra:
        manifest.update(extra)
    path = directory / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    LOGGER.debug("Wrote manifest %s.", path)
    return path
