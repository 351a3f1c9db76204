"""JSON scenario files.

The document is a flat object; every key is optional and missing keys take
the defaults of :class:`ScenarioConfig` (the reference scenario).  Unknown
keys are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any, Callable

from .channel import RfParams
from .geometry import IrsLayout, Point3
from .positioning import SolverConfig
from .simulation import ScenarioConfig, SweepSpec


class ConfigError(ValueError):
    pass


def _number(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key}: expected a finite number, got {value!r}")
    return float(value)


def _integer(key: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    return value


def _boolean(key: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{key}: expected true or false, got {value!r}")
    return value


def _point(key: str, value: Any) -> Point3:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"{key}: expected [x, y, z], got {value!r}")
    return Point3(*(_number(key, v) for v in value))


def _optional_number(key: str, value: Any) -> float | None:
    return None if value is None else _number(key, value)


def _origins(key: str, value: Any):
    if value is None:
        return None
    if not isinstance(value, list) or not all(isinstance(o, list) and len(o) == 2 for o in value):
        raise ConfigError(f"{key}: expected a list of [row, col] pairs, got {value!r}")
    return tuple((_integer(key, r), _integer(key, c)) for r, c in value)


def _sweep(key: str, value: Any) -> SweepSpec | None:
    if value is None:
        return None
    if not isinstance(value, dict):
        raise ConfigError(f"{key}: expected an object")
    allowed = {"axis", "from", "to", "step", "sigma_e"}
    unknown = sorted(set(value) - allowed)
    if unknown:
        raise ConfigError(f"{key}.{unknown[0]}: unknown key")
    kw: dict[str, Any] = {}
    if "axis" in value:
        kw["axis"] = value["axis"]
    for src, dst in (("from", "start"), ("to", "stop"), ("step", "step")):
        if src in value:
            kw[dst] = _number(f"{key}.{src}", value[src])
    if "sigma_e" in value:
        sig = value["sigma_e"]
        if not isinstance(sig, list) or not sig:
            raise ConfigError(f"{key}.sigma_e: expected a non-empty list")
        kw["sigma_e"] = tuple(_number(f"{key}.sigma_e", s) for s in sig)
    try:
        return SweepSpec(**kw)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


# key -> (parser, group); group is where the value lands when building the config
_LAYOUT = {"n_rows": _integer, "n_cols": _integer, "row_spacing": _number, "col_spacing": _number}
_RF = {
    "center_frequency": _number,
    "subband_count": _integer,
    "subband_width": _number,
    "pathloss_constant": _number,
    "pathloss_exponent": _number,
    "noise_power": _number,
}
_SOLVER = {
    "solver_max_iterations": _integer,
    "solver_initial_damping": _number,
    "solver_step_tol": _number,
    "solver_grad_tol": _number,
}
_SCENARIO: dict[str, Callable[[str, Any], Any]] = {
    "rus_count": _integer,
    "rus_rows": _integer,
    "rus_cols": _integer,
    "rus_origins": _origins,
    "ap_position": _point,
    "ue_position": _point,
    "sigma_e": _number,
    "oversampling_v": _integer,
    "oversampling_h": _integer,
    "shared_codeword": _boolean,
    "noisy_search": _boolean,
    "delay_t_min": _number,
    "delay_t_max": _optional_number,
    "delay_coarse_step": _optional_number,
    "delay_refine_iterations": _integer,
    "seed": _integer,
    "trials": _integer,
    "sweep": _sweep,
}
KNOWN_KEYS = frozenset(_LAYOUT) | frozenset(_RF) | frozenset(_SOLVER) | frozenset(_SCENARIO)


def _guess_key(message: str, keys) -> str | None:
    for k in sorted(keys, key=len, reverse=True):
        if k in message:
            return k
    return None


def config_from_dict(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = sorted(set(doc) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")

    def parsed(table):
        return {k: table[k](k, doc[k]) for k in table if k in doc}

    layout_kw, rf_kw = parsed(_LAYOUT), parsed(_RF)
    solver_kw = {k.removeprefix("solver_"): v for k, v in parsed(_SOLVER).items()}
    scenario_kw = parsed(_SCENARIO)
    try:
        layout = IrsLayout(**layout_kw)
        rf = RfParams(**rf_kw)
        solver = SolverConfig(**solver_kw)
        return ScenarioConfig(layout=layout, rf=rf, solver=solver, **scenario_kw)
    except (ValueError, IndexError) as exc:
        key = _guess_key(str(exc), doc) or _guess_key(str(exc), KNOWN_KEYS) or "config"
        raise ConfigError(f"{key}: {exc}") from None


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None
    return config_from_dict(doc)


def config_to_dict(config: ScenarioConfig) -> dict:
    """Inverse of :func:`config_from_dict`."""
    out: dict[str, Any] = {}
    out.update(asdict(config.layout))
    rf = asdict(config.rf)
    rf.pop("speed_of_light")
    out.update(rf)
    out.update({f"solver_{k}": v for k, v in asdict(config.solver).items()})
    for f in fields(config):
        if f.name in ("layout", "rf", "solver"):
            continue
        v = getattr(config, f.name)
        if isinstance(v, Point3):
            v = list(v)
        elif f.name == "rus_origins" and v is not None:
            v = [list(o) for o in v]
        elif isinstance(v, SweepSpec):
            v = {"axis": v.axis, "from": v.start, "to": v.stop, "step": v.step, "sigma_e": list(v.sigma_e)}
        out[f.name] = v
    return out
