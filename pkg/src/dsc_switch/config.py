"""Run configuration: TOML parsing, defaults, validation and echo.

Rates are given in units of ``omega_c`` and times in units of ``1/omega_c``.
Every key is optional; missing ones take the figure defaults of the chosen
``kind``. Top-level keys are flat; integrator overrides live in ``[numeric]``.
"""
from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field, fields
from typing import Any, Mapping, Optional, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ValidationError
from .hilbert import DEFAULT_N_MAX, HilbertSpace, make_named_state
from .model import CONVENTIONS, PulseSchedule, PulseSpec, SystemParams
from .observables import DEFAULT_WIGNER_EXTENT, DEFAULT_WIGNER_POINTS
from .propagate import INTEGRATORS, PropagationOptions
from .scenarios import FIGURE_DEFAULTS, KINDS, ScenarioSpec

DEFAULT_KIND = "wavepacket_roundtrip"


@dataclass(frozen=True)
class NumericConfig:
    dt_base: float
    dt_pulse: float
    record_stride: int = 1
    tol_refine: float = 1e-8
    check_refinement: bool = False
    integrator: str = "magnus4"


@dataclass(frozen=True)
class RunConfig:
    kind: str
    omega_c: float
    omega_q: float
    g1: float
    g2: float
    kappa: float
    gamma: float
    initial: str
    t_end: float
    n_max: int
    pulse_A: float
    pulse_omega: float
    pulse_tau: float
    pulse_times: tuple[float, ...]
    pulse_exponent_convention: str
    snapshot_times: tuple[float, ...]
    g_values: tuple[float, ...]
    wigner_extent: float
    wigner_points: int
    output_dir: str
    numeric: NumericConfig = field(default=None)


_TOP_KEYS = frozenset(f.name for f in fields(RunConfig)) - {"numeric"}
_KEY_KIND = {
    "kind": "str", "initial": "str", "pulse_exponent_convention": "str", "output_dir": "str",
    "n_max": "int", "wigner_points": "int",
    "pulse_times": "list", "snapshot_times": "list", "g_values": "list",
}
_NUMERIC_KIND = {
    "dt_base": "float", "dt_pulse": "float", "record_stride": "int",
    "tol_refine": "float", "check_refinement": "bool", "integrator": "str",
}


def _coerce(key: str, value: Any, kind: str) -> Any:
    def bad(expected):
        return ValidationError(f"{key}: expected {expected}, got {value!r}")

    if kind == "str":
        if not isinstance(value, str):
            raise bad("a string")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise bad("true or false")
        return value
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise bad("an integer")
        return value
    if kind == "list":
        if not isinstance(value, (list, tuple)):
            raise bad("a list of numbers")
        return tuple(_coerce(key, v, "float") for v in value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise bad("a number")
    value = float(value)
    if not math.isfinite(value):
        raise bad("a finite number")
    return value


def _split_document(doc: Mapping[str, Any]) -> tuple[dict, dict]:
    top, numeric = {}, {}
    for key, value in doc.items():
        if key == "numeric":
            if not isinstance(value, Mapping):
                raise ValidationError("numeric: expected a table")
            for nk, nv in value.items():
                if nk not in _NUMERIC_KIND:
                    raise ValidationError(f"unknown key numeric.{nk}")
                numeric[nk] = _coerce(f"numeric.{nk}", nv, _NUMERIC_KIND[nk])
        elif key in _NUMERIC_KIND:
            numeric[key] = _coerce(key, value, _NUMERIC_KIND[key])
        elif key in _TOP_KEYS:
            top[key] = _coerce(key, value, _KEY_KIND.get(key, "float"))
        else:
            raise ValidationError(f"unknown key {key!r}")
    return top, numeric


def parse_override(item: str) -> tuple[str, Any]:
    """``KEY=VALUE`` with VALUE read as a TOML value, else as a bare string."""
    if "=" not in item:
        raise ValidationError(f"override {item!r} is not of the form KEY=VALUE")
    key, raw = (s.strip() for s in item.split("=", 1))
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    return key, value


def _check(cfg: dict, num: dict) -> None:
    def need(cond, key, msg):
        if not cond:
            raise ValidationError(f"{key} {msg}, got {cfg.get(key, num.get(key))!r}")

    need(cfg["kind"] in KINDS, "kind", f"must be one of {KINDS}")
    need(cfg["omega_c"] > 0, "omega_c", "must be > 0")
    for key in ("omega_q", "g1", "g2", "kappa", "gamma"):
        need(cfg[key] >= 0, key, "must be >= 0")
    need(cfg["t_end"] > 0, "t_end", "must be > 0")
    need(cfg["n_max"] >= 1, "n_max", "must be >= 1")
    need(cfg["pulse_tau"] > 0, "pulse_tau", "must be > 0")
    need(all(t >= 0 for t in cfg["pulse_times"]), "pulse_times", "must all be >= 0")
    need(cfg["pulse_exponent_convention"] in CONVENTIONS, "pulse_exponent_convention",
         f"must be one of {CONVENTIONS}")
    need(all(0 <= t <= cfg["t_end"] for t in cfg["snapshot_times"]), "snapshot_times",
         "must lie in [0, t_end]")
    need(all(g > 0 for g in cfg["g_values"]), "g_values", "must all be > 0")
    need(cfg["wigner_extent"] > 0, "wigner_extent", "must be > 0")
    need(cfg["wigner_points"] >= 3, "wigner_points", "must be >= 3")
    if cfg["kind"] == "wigner_snapshots":
        need(len(cfg["snapshot_times"]) > 0, "snapshot_times", "must be nonempty for wigner_snapshots")
    if cfg["kind"] == "coupling_sweep":
        need(len(cfg["g_values"]) > 0, "g_values", "must be nonempty for coupling_sweep")
    need(num["dt_base"] > 0, "dt_base", "must be > 0")
    need(0 < num["dt_pulse"] <= num["dt_base"], "dt_pulse", "must be in (0, dt_base]")
    need(num["record_stride"] >= 1, "record_stride", "must be >= 1")
    need(num["tol_refine"] > 0, "tol_refine", "must be > 0")
    need(num["integrator"] in INTEGRATORS, "integrator", f"must be one of {INTEGRATORS}")
    try:
        make_named_state(HilbertSpace(cfg["n_max"]), cfg["initial"])
    except ValidationError as exc:
        raise ValidationError(f"initial: {exc}") from None


def resolve(
    doc: Mapping[str, Any],
    overrides: Sequence[tuple[str, Any]] = (),
    kind: Optional[str] = None,
) -> RunConfig:
    top, numeric = _split_document(doc)
    for key, value in overrides:
        if key.startswith("numeric."):
            key = key[len("numeric."):]
            if key not in _NUMERIC_KIND:
                raise ValidationError(f"unknown key numeric.{key}")
        more_top, more_num = _split_document({key: value})
        top.update(more_top)
        numeric.update(more_num)
    if kind is not None:
        if "kind" in top and top["kind"] != kind:
            raise ValidationError(f"kind: config says {top['kind']!r} but the command runs {kind!r}")
        top["kind"] = kind
    chosen = top.get("kind", DEFAULT_KIND)
    if chosen not in KINDS:
        raise ValidationError(f"kind must be one of {KINDS}, got {chosen!r}")

    defaults = FIGURE_DEFAULTS[chosen]
    cfg: dict[str, Any] = {
        "kind": chosen,
        "omega_c": 1.0,
        "n_max": DEFAULT_N_MAX,
        "pulse_exponent_convention": "divide",
        "snapshot_times": (),
        "g_values": (),
        "wigner_extent": DEFAULT_WIGNER_EXTENT,
        "wigner_points": DEFAULT_WIGNER_POINTS,
        "output_dir": "out",
    }
    for key, value in defaults.items():
        cfg[key] = tuple(float(v) for v in value) if isinstance(value, list) else value
    cfg.update(top)
    if chosen == "wigner_snapshots" and "t_end" not in top and cfg["snapshot_times"]:
        cfg["t_end"] = max(cfg["snapshot_times"])
    for key in ("omega_q", "g1", "g2", "kappa", "gamma", "t_end", "pulse_A", "pulse_omega", "pulse_tau"):
        cfg[key] = float(cfg[key])

    width = cfg["pulse_tau"] if cfg["pulse_exponent_convention"] == "divide" else 1 / (2 * cfg["pulse_tau"])
    num = {
        "dt_base": 2 * math.pi / 200,
        "record_stride": 1,
        "tol_refine": 1e-8,
        "check_refinement": False,
        "integrator": "magnus4",
        **numeric,
    }
    num.setdefault("dt_pulse", min(width / 50 if cfg["pulse_tau"] > 0 else num["dt_base"], num["dt_base"]))
    _check(cfg, num)
    return RunConfig(**cfg, numeric=NumericConfig(**num))


def parse_config(text: str, overrides: Sequence[tuple[str, Any]] = (), kind: Optional[str] = None) -> RunConfig:
    """Parse a TOML document into a fully resolved :class:`RunConfig`."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"config is not valid TOML: {exc}") from None
    return resolve(doc, overrides, kind)


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    return str(value)


def to_toml(config: RunConfig) -> str:
    """Echo a resolved config; ``parse_config(to_toml(c)) == c``."""
    lines = [f"{f.name} = {_toml_value(getattr(config, f.name))}" for f in fields(RunConfig) if f.name != "numeric"]
    lines.append("")
    lines.append("[numeric]")
    lines.extend(f"{f.name} = {_toml_value(getattr(config.numeric, f.name))}" for f in fields(NumericConfig))
    return "\n".join(lines) + "\n"


def to_spec(config: RunConfig) -> ScenarioSpec:
    """Absolute-unit scenario spec; rates scale by omega_c, times by 1/omega_c."""
    wc = config.omega_c
    params = SystemParams(
        omega_c=wc,
        omega_q=config.omega_q * wc,
        g1=config.g1 * wc,
        g2=config.g2 * wc,
        kappa=config.kappa * wc,
        gamma=config.gamma * wc,
    )
    schedule = PulseSchedule.of(
        (PulseSpec(config.pulse_A, config.pulse_omega * wc, config.pulse_tau / wc, t / wc)
         for t in config.pulse_times),
        config.pulse_exponent_convention,
    )
    num = config.numeric
    options = PropagationOptions(
        dt_base=num.dt_base / wc,
        dt_pulse=num.dt_pulse / wc,
        record_stride=num.record_stride,
        tol_refine=num.tol_refine,
        check_refinement=num.check_refinement,
        integrator=num.integrator,
    )
    extras: dict[str, Any] = {}
    if config.kind == "wigner_snapshots":
        extras = {
            "snapshot_times": [t / wc for t in config.snapshot_times],
            "wigner_extent": config.wigner_extent,
            "wigner_points": config.wigner_points,
        }
    elif config.kind == "coupling_sweep":
        extras = {"g_values": [g * wc for g in config.g_values]}
    return ScenarioSpec(
        kind=config.kind,
        params=params,
        t_end=config.t_end / wc,
        schedule=schedule,
        initial=config.initial,
        n_max=config.n_max,
        options=options,
        extras=extras,
    )
