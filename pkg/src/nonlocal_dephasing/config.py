"""
Run configuration of the command line tool: one JSON document per run.
"""
import dataclasses
import json
import logging
import os
import pathlib
import re
import typing

from dataclasses_json import Undefined, dataclass_json
from dataclasses_json.undefined import UndefinedParameterError

from . import validators as v
from .schedule import ARM_MAX, TOTAL_MAX, PlateSchedule
from .spectra import AmplitudeGrid, Characteristic, GaussianJointSpectrum
from .utils.exceptions import ConfigError, add_exception_notes
from .validators import ValidatorMixin

logger = logging.getLogger(__name__)

_FIELD_NOTE = re.compile(r"^field (\w+)$")


@dataclass_json(undefined=Undefined.RAISE)
@dataclasses.dataclass(frozen=True)
class RunConfig(ValidatorMixin):
    """
    Either a Gaussian model (`k` with `b` per lambda0^2 or `u` = B * 199^2) or an amplitude grid file.

    `a` is the visibility multiplying every simulated trace distance.
    """
    a: float = 1.0 >> v.gt(0.0) >> v.max(1.0)
    b: typing.Optional[float] = None >> v.min(0.0)
    u: typing.Optional[float] = None >> v.min(0.0)
    k: typing.Optional[float] = None >> v.range(-1.0, 1.0)
    m1: typing.Optional[float] = None
    m2: typing.Optional[float] = None
    grid_file: typing.Optional[str] = None
    offset: float = ARM_MAX >> v.range(0.0, ARM_MAX)
    step: float = 1.0 >> v.gt(0.0)
    total_expected: typing.Optional[float] = None >> v.gt(0.0)
    duration: float = 10.0 >> v.gt(0.0)
    points: typing.Optional[list[float]] = None >> v.all_min(0.0)
    offsets: typing.Optional[list[float]] = None >> v.min_length(1) >> v.all_min(0.0)
    seed: typing.Optional[int] = None
    out: typing.Optional[str] = None
    fit_out: typing.Optional[str] = None

    def validate(self):
        parametric = [i for i in ("b", "u", "k", "m1", "m2") if getattr(self, i) is not None]
        if self.grid_file is not None and parametric:
            raise add_exception_notes(
                ValueError(f"Expect either a grid file or a Gaussian model, got both ({', '.join(parametric)})"),
                "field grid_file",
            )
        if self.grid_file is None:
            if self.k is None:
                raise add_exception_notes(ValueError("Expect a grid file or a correlation coefficient"), "field k")
            if (self.b is None) == (self.u is None):
                raise add_exception_notes(ValueError("Expect exactly one of b and u"), "field b")
        if self.points is not None and any(i > TOTAL_MAX for i in self.points):
            raise add_exception_notes(ValueError(f"Expect points in [0, {TOTAL_MAX}]"), "field points")
        if self.offsets is not None and any(i > ARM_MAX for i in self.offsets):
            raise add_exception_notes(ValueError(f"Expect offsets in [0, {ARM_MAX}]"), "field offsets")

    def model(self) -> Characteristic:
        if self.grid_file is not None:
            return AmplitudeGrid.from_csv(self.grid_file)
        b = self.b if self.b is not None else self.u / ARM_MAX ** 2
        return GaussianJointSpectrum(b=b, k=self.k, m1=self.m1 or 0.0, m2=self.m2 or 0.0)

    def schedule(self) -> PlateSchedule:
        return PlateSchedule(self.offset)


def _key_line(text: str, key: str) -> int | None:
    match = re.search(rf'"{re.escape(key)}"\s*:', text)
    return text.count("\n", 0, match.start()) + 1 if match else None


def _leaves(exc: BaseException, notes: tuple[str, ...] = ()) -> typing.Iterator[tuple[BaseException, tuple[str, ...]]]:
    notes = notes + tuple(getattr(exc, "__notes__", ()))
    if isinstance(exc, BaseExceptionGroup):
        for item in exc.exceptions:
            yield from _leaves(item, notes)
    else:
        yield exc, notes


def _location(path: str | os.PathLike, line: int | None) -> str:
    return f"{path}:{line}:" if line is not None else f"{path}:"


def _config_error(path: str | os.PathLike, text: str, exc: BaseException) -> ConfigError:
    messages = []
    for item, notes in _leaves(exc):
        fields = [m.group(1) for m in map(_FIELD_NOTE.match, notes) if m]
        name = fields[0] if fields else None
        line = _key_line(text, name) if name else None
        prefix = _location(path, line) + (f" field {name}:" if name else "")
        messages.append(f"{prefix} {item}")
    return ConfigError("\n".join(messages))


def load_config(path: str | os.PathLike, overrides: typing.Mapping[str, typing.Any] | None = None) -> RunConfig:
    """
    Read a run configuration; `overrides` (command line flags) replace file fields before validation.

    Relative grid paths are resolved against the directory of the configuration file.

    :raise ConfigError: every failure, prefixed with `path:line:` where the line is known
    """
    logger.info("Load configuration %s", path)
    try:
        text = pathlib.Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: can't read configuration: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{_location(path, 1)} expect a JSON object")

    known = {i.name for i in dataclasses.fields(RunConfig)}
    unknown = [i for i in data if i not in known]
    if unknown:
        raise ConfigError("\n".join(f"{_location(path, _key_line(text, i))} unknown field {i}" for i in unknown))

    data.update({k: i for k, i in (overrides or {}).items() if i is not None})
    grid_file = data.get("grid_file")
    if isinstance(grid_file, str) and not os.path.isabs(grid_file):
        data["grid_file"] = os.path.join(os.path.dirname(os.fspath(path)), grid_file)

    try:
        config = RunConfig.from_dict(data)
    except UndefinedParameterError as exc:
        raise ConfigError(f"{_location(path, None)} {exc}") from exc
    except (ValueError, TypeError, ExceptionGroup) as exc:
        raise _config_error(path, text, exc) from exc
    logger.debug("Configuration %s", config)
    return config
