import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import (
    Any,
    Mapping,
    Optional,
    Union,
    get_args,
    get_origin,
    get_type_hints,
)

from analysis import AnalysisConfig
from errors import ValidationError
from flowsim import SimulationConfig
from geodata import GeneratorConfig
from history_match import HistoryMatchConfig
from model import ArchitectureConfig, TrainingConfig
from storage import config_hash, read_json, to_jsonable

schema_version = 1

seed_variable = "GWAE_SEED"


@dataclass
class RunConfig:
    """
    Every setting of a pipeline run, one section per stage

    Defaults are the full-scale settings; ``configs/desk.json`` scales
    them down.
    """

    schema_version: int = schema_version
    seed: int = 0
    # 0 means one worker per CPU
    threads: int = 0
    dataset: GeneratorConfig = field(default_factory=GeneratorConfig)
    model: ArchitectureConfig = field(default_factory=ArchitectureConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    flow: SimulationConfig = field(default_factory=SimulationConfig)
    hm: HistoryMatchConfig = field(default_factory=HistoryMatchConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    def __post_init__(self):
        if self.schema_version != schema_version:
            raise ValidationError(
                f"schema_version {self.schema_version} is not supported "
                + f"(expected {schema_version})"
            )
        if self.threads < 0:
            raise ValidationError("threads must be >= 0")

    def to_dict(self) -> dict:
        return to_jsonable(self)

    def settings(self) -> dict:
        """
        Everything that shapes the artifacts; the worker count does not
        """
        settings = self.to_dict()
        settings.pop("threads")

        return settings

    @property
    def hash(self) -> str:
        return config_hash(self.settings())


# region parsing


def _key(path: str, name: str) -> str:
    return f"{path}.{name}" if path else name


def _convert(hint: Any, value: Any, path: str) -> Any:
    origin = get_origin(hint)

    if origin is Union:
        if value is None:
            return None
        options = [a for a in get_args(hint) if a is not type(None)]
        return _convert(options[0], value, path)

    if dataclasses.is_dataclass(hint):
        return _build(hint, value, path)

    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ValidationError(f"{path} must be a list")
        args = get_args(hint)
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(
                _convert(args[0], v, f"{path}[{i}]") for i, v in enumerate(value)
            )
        if len(args) != len(value):
            raise ValidationError(f"{path} must have {len(args)} entries")
        return tuple(
            _convert(a, v, f"{path}[{i}]") for i, (a, v) in enumerate(zip(args, value))
        )

    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{path} must be a number")
        return float(value)

    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{path} must be an integer")
        return value

    if hint in (str, bool) and not isinstance(value, hint):
        raise ValidationError(f"{path} must be a {hint.__name__}")

    return value


def _build(cls: type, data: Any, path: str = ""):
    if not isinstance(data, Mapping):
        raise ValidationError(f"{path or 'config'} must be an object")

    hints = get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls) if f.init}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ValidationError(f"unknown config key {_key(path, unknown[0])}")

    return cls(
        **{
            name: _convert(hints[name], value, _key(path, name))
            for name, value in data.items()
        }
    )


# endregion


def parse_run_config(data: Mapping[str, Any]) -> RunConfig:
    """
    Strict construction from a JSON document: unknown keys at any level
    are rejected with their dotted path
    """
    if "schema_version" not in data:
        raise ValidationError("config is missing schema_version")

    return _build(RunConfig, data)


def load_run_config(
    path: Optional[Path] = None,
    threads: Optional[int] = None,
    environ: Mapping[str, str] = os.environ,
) -> RunConfig:
    """
    Read a run config and apply the overrides

    Parameters
    ----------
    path : Optional[Path]
        JSON config; all defaults when omitted
    threads : Optional[int]
        ``--threads`` override
    environ : Mapping[str, str]
        ``GWAE_SEED`` replaces the seed when set

    Returns
    -------
    RunConfig
    """
    if path is not None and not Path(path).is_file():
        raise ValidationError(f"config file not found: {path}")
    config = RunConfig() if path is None else parse_run_config(read_json(Path(path)))

    overrides = {}
    if environ.get(seed_variable):
        try:
            overrides["seed"] = int(environ[seed_variable])
        except ValueError as error:
            raise ValidationError(
                f"{seed_variable} must be an integer, got {environ[seed_variable]!r}"
            ) from error
    if threads is not None:
        overrides["threads"] = threads

    return dataclasses.replace(config, **overrides) if overrides else config
