"""Run configuration: YAML file + flag overrides onto nested dataclasses.

The configuration tree mirrors the module parameter dataclasses. Unknown keys
fail loudly with their full path; flag overrides win over file values; the
effective configuration is echoed next to the outputs and re-parses to the
identical configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, is_dataclass, replace
from pathlib import Path

import yaml

from .atmo import AtmoConstants
from .env import FieldConfig
from .filters import FilterTuning
from .geo import EarthConstants
from .sensors import GnssErrorParams, SensorConfig
from .truth import ScenarioRanges, TruthConfig
from .variants import AlgoVariant


@dataclass(frozen=True)
class RunConfig:
    """Top-level run configuration."""

    scenario: int = 2
    runs: int = 10
    seed: int = 0
    dt: float = 0.01
    t_end: float = 0.0          # 0 means the scenario default
    t_gnss: float = 100.0
    out_dir: str = "out"
    jobs: int = 1
    dump_truth: bool = False
    dump_estimates: bool = False
    variant: AlgoVariant = AlgoVariant()
    sensors: SensorConfig = SensorConfig()
    ranges: ScenarioRanges = ScenarioRanges()
    truth: TruthConfig = TruthConfig()
    tuning: FilterTuning = FilterTuning()
    earth: EarthConstants = EarthConstants()
    atmo: AtmoConstants = AtmoConstants()
    fields: FieldConfig = FieldConfig()

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.runs < 1:
            raise ValueError("run count must be >= 1")
        if self.scenario not in (1, 2):
            raise ValueError("scenario must be 1 or 2")
        t_end = self.t_end if self.t_end else (3800.0 if self.scenario == 1 else 500.0)
        if self.t_gnss >= t_end:
            raise ValueError("t_gnss must precede t_end")
        if self.dt != self.truth.dt:
            object.__setattr__(self, "truth", replace(self.truth, dt=self.dt))

    @property
    def t_end_effective(self) -> float:
        return self.t_end if self.t_end else (3800.0 if self.scenario == 1 else 500.0)


def _build(cls, data, path):
    """Recursively build a dataclass from a mapping, validating keys."""
    if not isinstance(data, dict):
        raise ValueError(f"config node {path or '<root>'} must be a mapping")
    proto = cls()
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise KeyError(f"unknown config key {path + key!r}")
        default = getattr(proto, key)
        if is_dataclass(default) and isinstance(value, dict):
            kwargs[key] = _build(type(default), value, f"{path}{key}.")
        elif isinstance(default, tuple):
            kwargs[key] = tuple(value)
        elif is_dataclass(default):
            raise ValueError(f"config key {path + key!r} must be a mapping")
        else:
            kwargs[key] = value
    return cls(**kwargs)


def _to_dict(obj):
    if is_dataclass(obj):
        return {f.name: _to_dict(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, tuple):
        return [_to_dict(v) for v in obj]
    return obj


def _merge(base: dict, override: dict, path="") -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value, f"{path}{key}.")
        else:
            out[key] = value
    return out


def parse_config(file_path=None, overrides: dict | None = None) -> RunConfig:
    """Load a YAML config file (optional) and apply nested overrides."""
    data: dict = {}
    if file_path is not None:
        loaded = yaml.safe_load(Path(file_path).read_text()) or {}
        if not isinstance(loaded, dict):
            raise ValueError("config file must contain a mapping")
        data = loaded
    if overrides:
        data = _merge(data, overrides)
    return _build(RunConfig, data, "")


def dump_config(cfg: RunConfig) -> str:
    """Serialize the effective configuration; re-parsing it reproduces cfg."""
    return yaml.safe_dump(_to_dict(cfg), sort_keys=False)
