import json
import os
import warnings
from enum import Enum
from pathlib import Path
from typing import Annotated, Any

import yaml
from pydantic import Field, field_validator
from pydantic.fields import FieldInfo
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

DEFAULT_CONFIG_FILE_PATH: str = str(Path.home().joinpath(".aettools.yml"))
"""Default configuration file path.

This variable is used as the fallback value if the environment variable
`AET_CONFIG_FILE` is not set.

!!! note
    It is set to: `pathlib.Path.home()/.aettools.yml`

    For Unix-based systems (Linux) this will be equivalent to `~/.aettools.yml`.

"""


class LogLevel(Enum):
    """Replication of logging LogLevels

    - `notset`
    - `debug`
    - `info`
    - `warning`
    - `error`
    - `critical`

    """

    NOTSET = "notset"
    DEBUG = "debug"
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"
    CRITICAL = "critical"


class ConfigFileSettingsSource(PydanticBaseSettingsSource):
    """Configuration file settings source.

    Loads [`AetSettings`][aettools.config.AetSettings] values from a
    configuration file. The file must be of either type JSON or YML/YAML.
    """

    def get_field_value(
        self, field: FieldInfo, field_name: str
    ) -> tuple[Any, str, bool]:
        """Must be defined according to parent abstract class.

        Every key in the config file is taken as-is, so this is never used.
        """
        raise NotImplementedError

    def parse_config_file(self) -> dict[str, Any]:
        """Parse the config file and return a dictionary of its content."""
        encoding = self.config.get("env_file_encoding")
        config_file = Path(os.getenv("AET_CONFIG_FILE", DEFAULT_CONFIG_FILE_PATH))

        parsed_config_file: Any = {}
        if config_file.is_file():
            config_file_content = config_file.read_text(encoding=encoding)

            try:
                parsed_config_file = json.loads(config_file_content)
            except json.JSONDecodeError as json_exc:
                try:
                    parsed_config_file = yaml.safe_load(config_file_content)
                except yaml.YAMLError as yaml_exc:
                    warnings.warn(
                        f"Unable to parse config file {config_file} as JSON or "
                        "YAML, using the default settings instead.\n"
                        f"Errors:\n  JSON:\n{json_exc}.\n\n  YAML:\n{yaml_exc}"
                    )
        elif "AET_CONFIG_FILE" in os.environ:
            # Only an explicitly requested file is worth complaining about.
            warnings.warn(
                f"Unable to find config file at {config_file}, using the default "
                "settings instead."
            )

        if parsed_config_file is None:
            # e.g. an empty YAML file
            warnings.warn(
                f"Unable to load any settings from {config_file}, using the default "
                "settings instead."
            )
            parsed_config_file = {}

        if not isinstance(parsed_config_file, dict):
            warnings.warn(
                f"Unable to parse config file {config_file} as a dictionary, using "
                "the default settings instead."
            )
            parsed_config_file = {}

        return parsed_config_file

    def __call__(self) -> dict[str, Any]:
        return self.parse_config_file()


class AetSettings(BaseSettings):
    """Run-time settings shared by every experiment run in this process.

    Experiment parameters (meshes, phantoms, LM hyperparameters) live in
    [`ExperimentConfig`][aettools.models.experiment.ExperimentConfig]; this
    class only carries the knobs that concern the machine the code runs on.
    """

    model_config = SettingsConfigDict(
        env_prefix="aet_",
        extra="ignore",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    debug: Annotated[
        bool,
        Field(description="Turns on debug logging on the console."),
    ] = False

    log_level: Annotated[
        LogLevel,
        Field(description="Logging level of the console handler."),
    ] = LogLevel.INFO

    log_dir: Annotated[
        Path,
        Field(description="Folder in which the rotating log file is written."),
    ] = Path("/var/log/aettools/")

    threads: Annotated[
        int,
        Field(
            ge=1,
            description="Number of worker threads used for per-measurement solves.",
        ),
    ] = 1

    max_triangles: Annotated[
        int,
        Field(
            gt=0,
            description="Mesh generation refuses to produce more triangles than this.",
        ),
    ] = 500_000

    solver_tol: Annotated[
        float,
        Field(gt=0, description="Relative residual tolerance of the linear solvers."),
    ] = 1e-10

    clamp_floor: Annotated[
        float,
        Field(
            gt=0,
            description="Positivity floor (S/m) applied to conductivity iterates.",
        ),
    ] = 1e-3

    @field_validator("log_level", mode="before")
    @classmethod
    def lowercase_log_level(cls, value: Any) -> Any:
        if isinstance(value, str):
            return value.lower()
        return value

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        """
        **Priority of config settings sources**:

        1. Passed arguments upon initialization of
            [`AetSettings`][aettools.config.AetSettings].
        2. Environment variables, matching the syntax: `"AET_"` or `"aet_"` +
            `<config_name>`, e.g., `AET_LOG_LEVEL=debug` or
            `AET_MAX_TRIANGLES=100000`.
        3. Configuration file (JSON/YAML) taken from:
            1. Environment variable `AET_CONFIG_FILE`.
            2. Default location (see
                [DEFAULT_CONFIG_FILE_PATH][aettools.config.DEFAULT_CONFIG_FILE_PATH]).
        4. Settings from secret file.

        """
        return (
            init_settings,
            env_settings,
            ConfigFileSettingsSource(settings_cls),
            file_secret_settings,
        )


CONFIG: AetSettings = AetSettings()
"""This singleton loads the settings from a hierarchy of sources (see
[`settings_customise_sources`][aettools.config.AetSettings.settings_customise_sources])
and makes them importable throughout the package.
"""
