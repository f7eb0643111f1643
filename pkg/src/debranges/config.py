"""Run configuration: parsing, validation, canonical hashing.

A run config fully determines every number the suite emits; together with the
seed it is hashed into the report provenance block.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Any

ALL_SUITES = ("measures", "weierstrass", "mittag_leffler", "s_function",
              "space", "counterexample")


class ConfigError(ValueError):
    """Invalid or unparsable configuration; carries the offending key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"config key '{key}': {message}")


@dataclass(frozen=True)
class RunConfig:
    measure_family: str = "integer_lattice"
    measure_n: int = 128
    measure_params: tuple[float, ...] = ()
    target_policy: str = "default"
    target_values: tuple[float, ...] | None = None
    radius: float | None = None
    tail_budget: float = 1e-9
    safety_factor: float = 1e-9
    zero_tol: float = 1e-10
    seed: int = 20240811
    suites: tuple[str, ...] = ALL_SUITES
    witness_master: int = 4096
    witness_schedule: tuple[int, ...] = (16, 32, 64, 128, 256, 512)
    witness_z0: float = 0.0
    u0_law: str = "1/n"
    sample_count: int = 32

    def canonical_dict(self) -> dict[str, Any]:
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = list(value)
        return data


def config_hash(cfg: RunConfig) -> str:
    blob = json.dumps(cfg.canonical_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _require(data: dict, key: str, kind, default):
    if key not in data:
        return default
    value = data[key]
    try:
        if kind is tuple:
            return tuple(value)
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, f"expected {kind.__name__}, got {value!r}") from exc


def run_config_from_dict(data: dict) -> RunConfig:
    """Validate a config mapping; raises ConfigError with the offending key."""
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    known = set(RunConfig.__dataclass_fields__)
    for key in data:
        if key not in known:
            raise ConfigError(key, "unknown key")
    cfg = RunConfig(
        measure_family=_require(data, "measure_family", str, "integer_lattice"),
        measure_n=_require(data, "measure_n", int, 128),
        measure_params=_require(data, "measure_params", tuple, ()),
        target_policy=_require(data, "target_policy", str, "default"),
        target_values=(tuple(data["target_values"])
                       if data.get("target_values") is not None else None),
        radius=(float(data["radius"]) if data.get("radius") is not None else None),
        tail_budget=_require(data, "tail_budget", float, 1e-9),
        safety_factor=_require(data, "safety_factor", float, 1e-9),
        zero_tol=_require(data, "zero_tol", float, 1e-10),
        seed=_require(data, "seed", int, 20240811),
        suites=_require(data, "suites", tuple, ALL_SUITES),
        witness_master=_require(data, "witness_master", int, 4096),
        witness_schedule=_require(data, "witness_schedule", tuple,
                                  (16, 32, 64, 128, 256, 512)),
        witness_z0=_require(data, "witness_z0", float, 0.0),
        u0_law=_require(data, "u0_law", str, "1/n"),
        sample_count=_require(data, "sample_count", int, 32),
    )
    if cfg.tail_budget <= 0:
        raise ConfigError("tail_budget", "must be positive")
    if cfg.safety_factor <= 0:
        raise ConfigError("safety_factor", "must be positive")
    if cfg.zero_tol <= 0:
        raise ConfigError("zero_tol", "must be positive")
    if cfg.measure_n < 1:
        raise ConfigError("measure_n", "must be at least 1")
    if cfg.seed < 0:
        raise ConfigError("seed", "must be nonnegative")
    sched = cfg.witness_schedule
    if not sched or any(b <= a for a, b in zip(sched, sched[1:])):
        raise ConfigError("witness_schedule", "must be nonempty and strictly increasing")
    if sched[-1] > cfg.witness_master:
        raise ConfigError("witness_schedule", "cutoffs exceed witness_master")
    unknown = [s for s in cfg.suites if s not in ALL_SUITES]
    if unknown:
        raise ConfigError("suites", f"unknown suite names {unknown}")
    return cfg


def load_run_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"{path} line {exc.lineno}: {exc.msg}") from exc
    return run_config_from_dict(data)
