"""Run configuration: a flat JSON object, plus the frozen scenario presets.

Keys are ``lambda1`` ... ``lambda7``, ``m``, ``m_r``, ``beta1``, ``beta2``,
``epsilon``, ``gamma``, ``alpha``, the initial state ``c0``, ``r0``, ``pc0``,
``pr0``, optional integrator overrides and an optional ``output`` path.
``gamma`` may be ``"auto"`` (``epsilon * N0``) and ``lambda5`` may be
``"auto"`` (``lambda7 * r0 / c0``).  Unknown keys are rejected.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import CustDynError, InvalidInputError
from .integrate import IntegratorConfig
from .model import PARAM_FIELDS, ModelParams, State

STATE_KEYS = ("c0", "r0", "pc0", "pr0")
INTEGRATOR_KEYS = ("h_init", "rel_tol", "abs_tol", "steady_tol", "steady_window", "max_steps")
OPTIONAL_KEYS = INTEGRATOR_KEYS + ("output",)
REQUIRED_KEYS = PARAM_FIELDS + STATE_KEYS


class ConfigError(CustDynError, ValueError):
    def __init__(self, message, field_name=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field_name is not None:
            where.append(f"field {field_name!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.field_name = field_name
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    initial: State
    integrator: dict = field(default_factory=dict)
    output: Optional[str] = None

    def integrator_config(self, **overrides) -> IntegratorConfig:
        n_inf = self.params.gamma / self.params.epsilon if self.params.epsilon > 0 else sum(self.initial)
        kw = dict(self.integrator)
        kw.update(overrides)
        return IntegratorConfig.for_scale(n_inf, **kw)

    def to_dict(self) -> dict:
        out = self.params.as_dict()
        out.update(zip(STATE_KEYS, map(float, self.initial)))
        out.update(self.integrator)
        if self.output is not None:
            out["output"] = self.output
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _number(raw, key):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"expected a number, got {raw!r}", key)
    value = float(raw)
    if not math.isfinite(value):
        raise ConfigError("must be finite", key)
    return value


def parse_config(data: dict, source_lines: Optional[list] = None) -> RunConfig:
    """Validate a flat config mapping and resolve the ``"auto"`` entries."""
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")

    def line_of(key):
        if source_lines is None:
            return None
        needle = f'"{key}"'
        for i, text in enumerate(source_lines, 1):
            if needle in text:
                return i
        return None

    unknown = sorted(set(data) - set(REQUIRED_KEYS) - set(OPTIONAL_KEYS))
    if unknown:
        raise ConfigError(f"unknown key (allowed: {', '.join(REQUIRED_KEYS + OPTIONAL_KEYS)})",
                          unknown[0], line_of(unknown[0]))
    missing = [k for k in REQUIRED_KEYS if k not in data]
    if missing:
        raise ConfigError("missing required key", missing[0])

    def num(key):
        try:
            return _number(data[key], key)
        except ConfigError as exc:
            raise ConfigError(str(exc).split(": ", 1)[-1], key, line_of(key)) from None

    initial = State(*(num(k) for k in STATE_KEYS))
    for key, value in zip(STATE_KEYS, initial):
        if value < 0:
            raise ConfigError("initial compartments must be nonnegative", key, line_of(key))
    values = {}
    for key in PARAM_FIELDS:
        if key in ("gamma", "lambda5") and data[key] == "auto":
            continue
        values[key] = num(key)
    if data["lambda5"] == "auto":
        if initial.C <= 0:
            raise ConfigError('"auto" needs c0 > 0', "lambda5", line_of("lambda5"))
        values["lambda5"] = values["lambda7"] * initial.R / initial.C
    if data["gamma"] == "auto":
        values["gamma"] = values["epsilon"] * initial.total
    try:
        params = ModelParams(**values)
    except InvalidInputError as exc:
        key = str(exc).split(" ", 1)[0]
        raise ConfigError(str(exc), key, line_of(key)) from None

    integrator = {}
    for key in INTEGRATOR_KEYS:
        if key in data:
            integrator[key] = int(num(key)) if key == "max_steps" else num(key)
    try:
        IntegratorConfig(**integrator)
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from None
    output = data.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("must be a string path", "output", line_of("output"))
    return RunConfig(params, initial, integrator, output)


def load_config(path, base: Optional[dict] = None) -> RunConfig:
    """Read a JSON config file; keys override ``base`` (a preset) when given."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", line=exc.lineno) from None
    if base is not None and isinstance(data, dict):
        merged = dict(base)
        merged.update(data)
        data = merged
    return parse_config(data, text.splitlines())


_TABLE1 = {
    "lambda1": 2e-4, "lambda2": 2e-4, "lambda3": 2e-4, "lambda4": 2e-4,
    "lambda5": "auto", "lambda6": 2e-4, "lambda7": 2e-4,
    "m": 40.0, "m_r": 0.0, "beta1": 0.18, "beta2": 0.18,
    "epsilon": 0.01, "gamma": "auto", "alpha": 0.01,
    "c0": 2200.0, "r0": 20.0, "pc0": 22000.0, "pr0": 200.0,
}
_WOM = {"lambda1": 0.0, "lambda3": 0.0, "lambda4": 0.0, "lambda5": 0.0, "lambda7": 0.0, "lambda2": 1e-5}
_FIG2 = {"lambda2": 0.0, "lambda6": 0.0, "m": 40.0, "m_r": 0.0, "lambda5": 1.8e-6}

PRESETS = {
    "table1": {},
    "fig3": {},
    "fig4": {},
    "fig5": {"m": 30.0, "m_r": 10.0},
    "fig6": {"lambda2": 1e-5, "m": 30.0, "m_r": 10.0},
    "fig1-left": {**_WOM, "m": 40.0, "m_r": 0.0},
    "fig1-right": {**_WOM, "m": 30.0, "m_r": 10.0},
    "fig2-left": {**_FIG2, "alpha": 0.0},
    "fig2-right": {**_FIG2, "alpha": 0.5},
    "no-referral": {"lambda2": 0.0, "lambda6": 0.0},
    "static": {"lambda5": 0.0, "lambda7": 0.0},
}

PRESET_DESCRIPTIONS = {
    "table1": "base parameters, undifferentiated marketing (m, m_r) = (40, 0)",
    "fig3": "(m, m_r) = (40, 0): regular customers",
    "fig4": "(m, m_r) = (40, 0): referrals",
    "fig5": "(m, m_r) = (30, 10)",
    "fig6": "(m, m_r) = (30, 10) with lambda2 = 1e-5 (reduced-system condition holds)",
    "fig1-left": "word of mouth, lambda2 = 1e-5, (40, 0): tau < 1",
    "fig1-right": "word of mouth, lambda2 = 1e-5, (30, 10): tau > 1",
    "fig2-left": "no referral pull, lambda5 = 1.8e-6, alpha = 0",
    "fig2-right": "no referral pull, lambda5 = 1.8e-6, alpha = 0.5",
    "no-referral": "base parameters with lambda2 = lambda6 = 0",
    "static": "base parameters with lambda5 = lambda7 = 0",
}


def preset_dict(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return {**_TABLE1, **PRESETS[name]}


def preset(name: str) -> RunConfig:
    return parse_config(preset_dict(name))
