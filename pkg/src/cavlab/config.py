"""JSON run configuration shared by every CLI subcommand."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError

DEFAULT_TOLERANCES = {
    "identity": 1e-10,
    "partner": 1e-9,
    "conjugation": 1e-12,
    "slope": 0.02,
    "overlap_floor": 0.9,
}

SUITES = ("identities", "case5", "partner", "slopes", "holonomy")


@dataclass
class LoopConfig:
    center: list = field(default_factory=lambda: [0.0, 0.0])
    radii: list = field(default_factory=lambda: [0.01, 0.01])
    K: int = 256
    export_points: list = field(default_factory=list)


@dataclass
class RunConfig:
    p: int = 1
    q: int = 1
    b: float = 1.0
    N: int | None = None
    N_max: int | None = None
    min_size: int = 2
    modes: list | None = None
    alpha: float | None = None
    beta: float | None = None
    alpha_prime: float | None = None
    beta_prime: float | None = None
    loop: LoopConfig = field(default_factory=LoopConfig)
    grid: list = field(default_factory=lambda: [201, 201])
    epsilons: list = field(default_factory=lambda: [4e-3, 2e-3, 1e-3])
    direction: list | None = None
    level: int = 0
    format: str = "PGM"
    pgm_mode: str = "signed"
    field_grid: list = field(default_factory=lambda: [101, 101])
    suites: list = field(default_factory=lambda: ["identities", "case5", "partner"])
    partner_samples: int = 20
    partner_radius: float = 0.05
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    out: str = "cavlab_out"

    def validate(self) -> "RunConfig":
        for name in ("p", "q", "min_size", "level", "partner_samples", "seed"):
            _require_int(name, getattr(self, name))
        for name in ("N", "N_max"):
            if getattr(self, name) is not None:
                _require_int(name, getattr(self, name))
        if self.min_size < 1:
            raise ConfigError("min_size must be >= 1")
        for name in ("b", "alpha", "beta", "alpha_prime", "beta_prime", "partner_radius"):
            val = getattr(self, name)
            if val is not None and (not isinstance(val, (int, float)) or isinstance(val, bool) or not math.isfinite(val)):
                raise ConfigError(f"{name} must be a finite number, got {val!r}")
        if len(self.grid) != 2 or len(self.field_grid) != 2:
            raise ConfigError("grid sizes are [Nu, Nv]")
        for g in (*self.grid, *self.field_grid):
            _require_int("grid", g)
        if self.modes is not None:
            if not all(isinstance(md, (list, tuple)) and len(md) == 2 for md in self.modes):
                raise ConfigError("modes is a list of [n, m] pairs")
        if not self.epsilons or not all(isinstance(e, (int, float)) and e > 0 for e in self.epsilons):
            raise ConfigError("epsilons must be positive numbers")
        if self.direction is not None and (len(self.direction) != 2 or not any(self.direction)):
            raise ConfigError("direction must be a nonzero [d_alpha, d_beta]")
        unknown = set(self.suites) - set(SUITES)
        if unknown:
            raise ConfigError(f"unknown suites {sorted(unknown)}; choose from {list(SUITES)}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance keys {sorted(unknown)}")
        self.tolerances = {**DEFAULT_TOLERANCES, **self.tolerances}
        if self.format.upper() not in ("PGM", "CSV"):
            raise ConfigError(f"format must be PGM or CSV, got {self.format!r}")
        if self.loop.K < 3:
            raise ConfigError(f"loop K must be >= 3 (got {self.loop.K}); the loop is too coarse")
        if len(self.loop.center) != 2 or len(self.loop.radii) != 2:
            raise ConfigError("loop center and radii are 2-vectors")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


def _require_int(name, val):
    if not isinstance(val, int) or isinstance(val, bool):
        raise ConfigError(f"{name} must be an integer, got {val!r}")


def _build(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where or 'config'} must be a JSON object")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in {where or 'config'}: {sorted(unknown)}")
    kwargs = dict(data)
    if cls is RunConfig and "loop" in kwargs:
        kwargs["loop"] = _build(LoopConfig, kwargs["loop"], "loop")
    return cls(**kwargs)


def config_from_dict(data: dict) -> RunConfig:
    if isinstance(data, dict) and data.get("cavlab_manifest"):
        data = data.get("config", {})
    return _build(RunConfig, data, "").validate()


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(data)


def _clean(obj, digits: int):
    if isinstance(obj, dict):
        return {str(k): _clean(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist(), digits)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{digits}g}")
    return obj


def dumps(obj, digits: int = 12) -> str:
    """Deterministic JSON: sorted keys, floats rounded to ``digits`` significant digits."""
    return json.dumps(_clean(obj, digits), indent=2, sort_keys=True) + "\n"
