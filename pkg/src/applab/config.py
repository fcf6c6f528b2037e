"""Experiment configuration: a JSON object per run."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

from .exceptions import ApplabError, DomainError
from .functions import function_from_config
from .operator import PRESETS

__all__ = [
    "EXPERIMENTS",
    "CHECK_KINDS",
    "TOLERANCE_KEYS",
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "dump_config",
]

EXPERIMENTS = ("validate", "eval", "moments", "limits", "verify-paper", "rates", "dbv")
CHECK_KINDS = ("korovkin", "lipschitz", "voronovskaja", "local", "dt", "steklov", "weighted")
TOLERANCE_KEYS = (
    "rel_tol",
    "abs_tol",
    "limit_rel_tol",
    "limit_abs_tol",
    "weight_eps",
    "quad_rel_tol",
    "quad_abs_tol",
)
_NEEDS_N = ("eval", "moments", "rates", "dbv")
_OPERATOR_KEYS = ("preset", "a", "b", "rho", "c", "discrete")
_TOP_KEYS = ("experiment", "operator", "grids", "function", "tolerances", "output_path", "checks", "routes", "orders")


class ConfigError(ApplabError, ValueError):
    """Malformed configuration; ``field`` names the offending entry."""

    def __init__(self, message: str, field: str = "", line: int | None = None):
        where = field or "config"
        if line is not None:
            where += f" (line {line})"
        super().__init__(f"{where}: {message}")
        self.field = field
        self.line = line


@dataclass
class ExperimentConfig:
    experiment: str
    operator: dict
    grids: dict
    function: Any = None
    tolerances: dict = field(default_factory=dict)
    output_path: str = ""
    checks: list = field(default_factory=list)
    routes: list = field(default_factory=list)
    orders: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        return {k: v for k, v in out.items() if v not in (None, "", [], {}) or k in ("experiment", "operator", "grids")}

    def tolerance(self, key: str, default: float) -> float:
        return float(self.tolerances.get(key, default))


def _number(value, where: str, *, positive=False, nonneg=False, integer=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", where)
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError("must be finite", where)
    if positive and not v > 0:
        raise ConfigError(f"must be positive, got {value!r}", where)
    if nonneg and not v >= 0:
        raise ConfigError(f"must be nonnegative, got {value!r}", where)
    if integer and v != int(v):
        raise ConfigError(f"must be an integer, got {value!r}", where)
    return int(v) if integer else v


def _number_list(value, where: str, **kw) -> list:
    if not isinstance(value, list):
        raise ConfigError("expected a list of numbers", where)
    if not value:
        raise ConfigError("must be nonempty", where)
    return [_number(v, f"{where}[{i}]", **kw) for i, v in enumerate(value)]


def _check_function(spec, where: str):
    try:
        function_from_config(spec)
    except (DomainError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), where) from None


def _operator(raw, where: str = "operator") -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("expected an object", where)
    unknown = sorted(set(raw) - set(_OPERATOR_KEYS))
    if unknown:
        raise ConfigError(f"unknown keys {unknown}; allowed {list(_OPERATOR_KEYS)}", where)
    out: dict = {}
    if "preset" in raw:
        if raw["preset"] not in PRESETS:
            raise ConfigError(f"unknown preset {raw['preset']!r}; choose from {list(PRESETS)}", f"{where}.preset")
        out["preset"] = raw["preset"]
    elif "a" not in raw:
        raise ConfigError("needs either 'preset' or coefficient list 'a'", where)
    for key in ("a", "b"):
        if key in raw:
            if not isinstance(raw[key], list) or (key == "a" and not raw[key]):
                raise ConfigError("expected a nonempty list of numbers" if key == "a" else "expected a list", f"{where}.{key}")
            out[key] = [_number(v, f"{where}.{key}[{i}]") for i, v in enumerate(raw[key])]
    if "rho" in raw:
        out["rho"] = _number(raw["rho"], f"{where}.rho", positive=True)
    if "c" in raw:
        out["c"] = _number(raw["c"], f"{where}.c", nonneg=True, integer=True)
    if "discrete" in raw:
        if not isinstance(raw["discrete"], bool):
            raise ConfigError("expected true or false", f"{where}.discrete")
        out["discrete"] = raw["discrete"]
    return out


def _grids(raw, experiment: str) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("expected an object with 'x' and 'n' lists", "grids")
    unknown = sorted(set(raw) - {"x", "n", "i_max"})
    if unknown:
        raise ConfigError(f"unknown keys {unknown}", "grids")
    if "x" not in raw:
        raise ConfigError("missing required list 'x'", "grids.x")
    out = {"x": _number_list(raw["x"], "grids.x", nonneg=True)}
    if "n" in raw:
        out["n"] = _number_list(raw["n"], "grids.n", positive=True)
    elif experiment in _NEEDS_N:
        raise ConfigError(f"missing required list 'n' for experiment {experiment!r}", "grids.n")
    if "i_max" in raw:
        out["i_max"] = _number(raw["i_max"], "grids.i_max", nonneg=True, integer=True)
    return out


def _checks(raw) -> list:
    if not isinstance(raw, list):
        raise ConfigError("expected a list of check objects", "checks")
    out = []
    for i, item in enumerate(raw):
        where = f"checks[{i}]"
        if not isinstance(item, dict) or item.get("kind") not in CHECK_KINDS:
            raise ConfigError(f"each check needs 'kind' in {list(CHECK_KINDS)}", where)
        entry = {"kind": item["kind"]}
        for key, value in item.items():
            if key == "kind":
                continue
            if key == "function":
                _check_function(value, f"{where}.function")
                entry[key] = value
            elif key == "interval":
                entry[key] = _number_list(value, f"{where}.interval")
                if len(entry[key]) != 2 or not entry[key][1] > entry[key][0]:
                    raise ConfigError("expected [lo, hi] with hi > lo", f"{where}.interval")
            elif key in ("b", "a", "alpha", "x_max", "M"):
                entry[key] = _number(value, f"{where}.{key}", positive=True)
            elif key == "tau":
                entry[key] = _number(value, f"{where}.tau", nonneg=True)
                if entry[key] > 1:
                    raise ConfigError("tau must lie in [0, 1]", f"{where}.tau")
            else:
                raise ConfigError(f"unknown key {key!r}", where)
        out.append(entry)
    return out


def _from_dict(data: Any, experiment: str | None = None) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")
    unknown = sorted(set(data) - set(_TOP_KEYS))
    if unknown:
        raise ConfigError(f"unknown keys {unknown}; allowed {list(_TOP_KEYS)}")
    exp = data.get("experiment", experiment)
    if exp is None:
        raise ConfigError("missing experiment name", "experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}; choose from {list(EXPERIMENTS)}", "experiment")
    if experiment is not None and exp != experiment:
        raise ConfigError(f"config is for {exp!r} but {experiment!r} was requested", "experiment")
    if "operator" not in data:
        raise ConfigError("missing required object", "operator")
    if "grids" not in data:
        raise ConfigError("missing required object", "grids")
    cfg = ExperimentConfig(exp, _operator(data["operator"]), _grids(data["grids"], exp))
    if "function" in data:
        _check_function(data["function"], "function")
        cfg.function = data["function"]
    if "tolerances" in data:
        tol = data["tolerances"]
        if not isinstance(tol, dict):
            raise ConfigError("expected an object", "tolerances")
        for key, value in tol.items():
            if key not in TOLERANCE_KEYS:
                raise ConfigError(f"unknown tolerance {key!r}; allowed {list(TOLERANCE_KEYS)}", "tolerances")
            cfg.tolerances[key] = _number(value, f"tolerances.{key}", positive=True)
        if cfg.tolerances.get("weight_eps", 0) >= 1e-6:
            raise ConfigError("must be below 1e-6", "tolerances.weight_eps")
    if "output_path" in data:
        if not isinstance(data["output_path"], str) or not data["output_path"]:
            raise ConfigError("expected a nonempty string", "output_path")
        cfg.output_path = data["output_path"]
    if "checks" in data:
        cfg.checks = _checks(data["checks"])
    if "routes" in data:
        from .moments import ROUTES

        if not isinstance(data["routes"], list) or not data["routes"] or any(r not in ROUTES for r in data["routes"]):
            raise ConfigError(f"expected a nonempty list drawn from {list(ROUTES)}", "routes")
        cfg.routes = list(data["routes"])
    if "orders" in data:
        if not isinstance(data["orders"], list) or not data["orders"] or any(o not in (1, 2, 4) for o in data["orders"]):
            raise ConfigError("expected a nonempty list drawn from [1, 2, 4]", "orders")
        cfg.orders = [int(o) for o in data["orders"]]
    return cfg


def parse_config(text: str, experiment: str | None = None) -> ExperimentConfig:
    """Parse and validate a JSON config; errors carry the line or field at fault."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, f"column {exc.colno}", line=exc.lineno) from None
    return _from_dict(data, experiment)


def load_config(path, experiment: str | None = None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    return parse_config(text, experiment)


def dump_config(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"
