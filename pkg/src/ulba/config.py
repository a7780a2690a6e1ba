"""Flat ``key = value`` run configuration, one INI section per parameter block.

Sections: ``[instance]``, ``[sampling]``, ``[anneal]``, ``[sim]`` and
``[run]``. Unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass, field
from typing import Any

from .erosion import ConfigError, SimConfig
from .model import AppInstance
from .optimizer import AnnealParams
from .sampling import SamplingSpec

SEED_ENV = "LBA_SEED"


INSTANCE_KEYS = {"P": int, "N": int, "gamma": int, "w0": float, "a": float, "m": float,
                 "alpha": float, "omega": float, "c_seconds": float}
INSTANCE_REQUIRED = ("P", "N", "gamma", "w0", "a", "m")

RUN_KEYS = {
    "policy": str,
    "alpha": float,
    "seed": int,
    "n_seeds": int,
    "fractions": "floats",
    "alpha_grid_size": int,
    "alpha_grid": "floats",
    "p_grid": "ints",
    "strong_grid": "ints",
    "free_initial_balance": bool,
    "bins": int,
}


def _field_types(cls) -> dict[str, Any]:
    out = {}
    for f in dataclasses.fields(cls):
        default = f.default
        if isinstance(default, tuple):
            out[f.name] = "ints" if all(isinstance(v, int) for v in default) else "floats"
        else:
            out[f.name] = type(default)
    return out


SECTION_KEYS: dict[str, dict[str, Any]] = {
    "instance": INSTANCE_KEYS,
    "sampling": {k: v for k, v in _field_types(SamplingSpec).items() if k != "seed"},
    "anneal": {k: v for k, v in _field_types(AnnealParams).items() if k != "seed"},
    "sim": _field_types(SimConfig),
    "run": RUN_KEYS,
}


def _convert(section: str, key: str, raw: str, kind: Any) -> Any:
    try:
        if kind == "ints":
            return tuple(int(v) for v in raw.split(",") if v.strip())
        if kind == "floats":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if kind is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None


@dataclass
class RunConfig:
    """Resolved parameters of one CLI invocation."""

    values: dict[str, dict[str, Any]] = field(default_factory=lambda: {s: {} for s in SECTION_KEYS})
    source: str | None = None

    def set(self, section: str, key: str, raw: str) -> None:
        if section not in SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        kinds = SECTION_KEYS[section]
        if key not in kinds:
            raise ConfigError(f"unknown key {key!r} in section [{section}]")
        self.values[section][key] = _convert(section, key, raw, kinds[key])

    def get(self, section: str, key: str, default: Any = None) -> Any:
        return self.values[section].get(key, default)

    def seed(self) -> int:
        if "seed" in self.values["run"]:
            return self.values["run"]["seed"]
        env = os.environ.get(SEED_ENV)
        if env is not None:
            try:
                return int(env)
            except ValueError:
                raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from None
        return 0

    def instance(self) -> AppInstance:
        block = self.values["instance"]
        for key in INSTANCE_REQUIRED:
            if key not in block:
                raise ConfigError(f"missing required key {key!r} in section [instance]")
        return AppInstance(**block)

    def sampling(self) -> SamplingSpec:
        return SamplingSpec(seed=self.seed(), **self.values["sampling"])

    def anneal(self) -> AnnealParams:
        return AnnealParams(seed=self.seed(), **self.values["anneal"])

    def sim(self) -> SimConfig:
        return SimConfig(**self.values["sim"])

    def resolved(self) -> dict[str, Any]:
        """Explicit settings plus the effective seed, for manifests."""
        out = {s: {k: list(v) if isinstance(v, tuple) else v for k, v in block.items()}
               for s, block in self.values.items() if block}
        out.setdefault("run", {})["seed"] = self.seed()
        return out


def load_config(path: str | os.PathLike | None) -> RunConfig:
    cfg = RunConfig(source=None if path is None else str(path))
    if path is None:
        return cfg
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case sensitive (P vs p)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    for section in parser.sections():
        for key, raw in parser.items(section):
            try:
                cfg.set(section, key, raw)
            except ConfigError as exc:
                raise ConfigError(f"{path}: {exc}") from None
    return cfg


def apply_override(cfg: RunConfig, assignment: str) -> None:
    """Apply ``section.key=value``."""
    lhs, sep, raw = assignment.partition("=")
    section, dot, key = lhs.strip().partition(".")
    if not sep or not dot:
        raise ConfigError(f"override {assignment!r} is not of the form section.key=value")
    cfg.set(section, key, raw)
