"""Pipeline configuration: one JSON file plus ``--set key=value`` overrides."""
from __future__ import annotations

import copy
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .evaluate import EvalParams
from .gripper import GripperSpec
from .refine import RefineParams
from .sampler import SamplerParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    sampler: SamplerParams = field(default_factory=SamplerParams)
    eval: EvalParams = field(default_factory=EvalParams)
    refine: RefineParams = field(default_factory=RefineParams)
    gripper: GripperSpec = field(default_factory=GripperSpec)
    seed: int = 0
    worker_count: int = 1
    lattice_size: int = 800
    evaluator: str = "quasi-static"
    cloud_points_per_object: int = 2048

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


_SECTIONS = {"sampler": SamplerParams, "eval": EvalParams, "refine": RefineParams, "gripper": GripperSpec}
_TOP = {"seed": int, "worker_count": int, "lattice_size": int, "evaluator": str, "cloud_points_per_object": int}


def _coerce(value, default, where):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected a boolean")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{where}: expected a list")
        try:
            return tuple(float(v) for v in value)
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: expected a list of numbers") from None
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string")
        return value
    return value


def config_from_dict(doc: dict) -> PipelineConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config: expected a JSON object")
    kwargs = {}
    for key, value in doc.items():
        if key in _SECTIONS:
            cls = _SECTIONS[key]
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: expected an object")
            defaults = cls()
            names = {f.name for f in dataclasses.fields(cls)}
            sub = {}
            for k, v in value.items():
                if k not in names:
                    raise ConfigError(f"{key}.{k}: unknown field")
                sub[k] = _coerce(v, getattr(defaults, k), f"{key}.{k}")
            try:
                kwargs[key] = cls(**sub)
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}") from None
        elif key in _TOP:
            kwargs[key] = _coerce(value, _TOP[key](), key) if _TOP[key] is not str else _coerce(value, "", key)
        else:
            raise ConfigError(f"{key}: unknown field")
    cfg = PipelineConfig(**kwargs)
    if cfg.worker_count < 1:
        raise ConfigError("worker_count: must be >= 1")
    if cfg.lattice_size < 2:
        raise ConfigError("lattice_size: must be >= 2")
    if cfg.cloud_points_per_object < 1:
        raise ConfigError("cloud_points_per_object: must be >= 1")
    try:
        cfg.gripper.build()
    except ValueError as exc:
        raise ConfigError(f"gripper: {exc}") from None
    return cfg


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply ``a.b=value`` strings; values parse as JSON, falling back to a bare string."""
    doc = copy.deepcopy(doc)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        parts = key.strip().split(".")
        node = doc
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"{key}: {p} is not a section")
        node[parts[-1]] = value
    return doc


def load_config(path=None, overrides=()) -> PipelineConfig:
    doc = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except OSError:
            raise ConfigError(f"config: cannot read {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from None
    return config_from_dict(apply_overrides(doc, overrides))
