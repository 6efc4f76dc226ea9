"""Run configuration files: INI sections mapped onto the RunConfig model."""
import configparser
import io
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Tuple, Union

from pydantic import BaseModel, ValidationError

from domain.exceptions import ConfigValidationError
from domain.models.run_config import AnalysisSection, RunConfig

SECTIONS = ("run", "domain", "time", "diagnostics", "model", "analysis")
SPECIES_PREFIX = "species."


def _parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive
    return parser


def _key_path(location: Tuple[Any, ...]) -> str:
    """Maps a pydantic error location onto '[section].key'."""
    if not location:
        return "[config]"
    if location[0] == "species" and len(location) >= 2:
        section = f"species.{location[1]}"
        rest = location[2:]
    else:
        section = str(location[0])
        rest = location[1:]
    if not rest:
        return f"[{section}]"
    return f"[{section}]." + ".".join(str(part) for part in rest)


def _validation_error(exc: ValidationError, prefix: Tuple[Any, ...] = ()) -> ConfigValidationError:
    first = exc.errors()[0]
    return ConfigValidationError(_key_path(prefix + tuple(first["loc"])), first["msg"])


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


def _section_items(model: BaseModel) -> Iterable[Tuple[str, str]]:
    for key, value in model.model_dump().items():
        if value is not None:
            yield key, _format(value)


class RunConfigLoader:
    """Reads, validates and writes run configuration files."""

    @staticmethod
    def parse(text: str, validate: bool = True) -> RunConfig:
        """
        Parses the INI text of a run configuration.

        Args:
            text: File contents
            validate: Also check the cross-section physical constraints

        Returns:
            RunConfig

        Raises:
            ConfigValidationError: With the key path of the first invalid value
        """
        parser = _parser()
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigValidationError("[config]", f"malformed file: {exc}") from exc

        data: Dict[str, Any] = {}
        species: Dict[int, Dict[str, str]] = {}
        for section in parser.sections():
            if section.startswith(SPECIES_PREFIX):
                suffix = section[len(SPECIES_PREFIX):]
                if not suffix.isdigit():
                    raise ConfigValidationError(f"[{section}]", "species sections are named species.<index>")
                species[int(suffix)] = dict(parser[section])
            elif section in SECTIONS:
                data[section] = dict(parser[section])
            else:
                raise ConfigValidationError(f"[{section}]", f"unknown section (expected {', '.join(SECTIONS)} or species.<i>)")

        if sorted(species) != list(range(len(species))):
            raise ConfigValidationError("[species]", f"species indices must be 0..n-1, got {sorted(species)}")
        data["species"] = [species[i] for i in range(len(species))]

        try:
            config = RunConfig.model_validate(data)
        except ValidationError as exc:
            raise _validation_error(exc) from exc
        return config.validate_physics() if validate else config

    @staticmethod
    def load(path: Union[str, Path], validate: bool = True) -> RunConfig:
        """
        Loads a run configuration file.

        Raises:
            ConfigValidationError: If the file is missing or invalid
        """
        path = Path(path)
        if not path.is_file():
            raise ConfigValidationError(f"[{path}]", "configuration file not found")
        return RunConfigLoader.parse(path.read_text(encoding="utf-8"), validate=validate)

    @staticmethod
    def serialize(config: RunConfig) -> str:
        """Writes a configuration so that parse(serialize(config)) == config."""
        parser = _parser()
        for name in ("run", "domain"):
            parser[name] = dict(_section_items(getattr(config, name)))
        for index, section in enumerate(config.species):
            parser[f"{SPECIES_PREFIX}{index}"] = dict(_section_items(section))
        for name in ("time", "diagnostics", "model", "analysis"):
            parser[name] = dict(_section_items(getattr(config, name)))
        buffer = io.StringIO()
        parser.write(buffer)
        return buffer.getvalue()

    @staticmethod
    def load_thresholds(path: Union[str, Path]) -> AnalysisSection:
        """
        Loads an analysis thresholds file holding a single [analysis] section.

        Raises:
            ConfigValidationError: If the file is missing, has other sections or invalid values
        """
        path = Path(path)
        if not path.is_file():
            raise ConfigValidationError(f"[{path}]", "thresholds file not found")
        parser = _parser()
        try:
            parser.read_string(path.read_text(encoding="utf-8"))
        except configparser.Error as exc:
            raise ConfigValidationError("[analysis]", f"malformed file: {exc}") from exc
        extra = [s for s in parser.sections() if s != "analysis"]
        if extra:
            raise ConfigValidationError(f"[{extra[0]}]", "thresholds files hold only an [analysis] section")
        values = dict(parser["analysis"]) if parser.has_section("analysis") else {}
        try:
            return AnalysisSection.model_validate(values)
        except ValidationError as exc:
            raise _validation_error(exc, ("analysis",)) from exc
