"""JSON run configuration: schema validation and angle-expression parsing.

A configuration document has up to four blocks:

    {"scenario": {"kind": "planar-strip", "r": 1.0, "gamma": "3pi/4"},
     "numerics": {"nt": 64, "ns": 64, "oracle_ns": 1001},
     "task":     {"h": 5.0, "m": 5, "steps": 20, "ds": 0.005, ...},
     "output":   {"dir": "out", "format": "csv"}}

Unknown keys are rejected.  Angle and length fields accept either JSON
numbers or expressions like "3pi/4", "pi/2", "0.6pi".
"""

from __future__ import annotations

import json
import math
import re

from .errors import InvalidConfig
from .geometry import Convexity, CylinderConfig, Scenario

_EXPR = re.compile(
    r"^\s*(?P<sign>-)?\s*(?P<coef>\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*(?P<pi>pi)?"
    r"\s*(?:/\s*(?P<div>\d+(?:\.\d*)?|\.\d+))?\s*$")

_SCENARIO_KEYS = {"kind", "r", "gamma", "beta", "convexity"}
_NUMERICS_KEYS = {"nt", "ns", "oracle_ns"}
_TASK_KEYS = {"h", "period", "m", "steps", "ds", "epsilon0", "axis", "values", "run"}
_OUTPUT_KEYS = {"dir", "format"}
_TOP_KEYS = {"scenario", "numerics", "task", "output"}

NUMERICS_DEFAULTS = {"nt": 64, "ns": 64, "oracle_ns": 1001}


def parse_number(value) -> float:
    """A JSON number, or an expression in pi ("3pi/4", "pi/2", "0.6pi")."""
    if isinstance(value, bool):
        raise InvalidConfig(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise InvalidConfig(f"expected a number or expression, got {value!r}")
    m = _EXPR.match(value)
    if not m or (m.group("coef") is None and m.group("pi") is None):
        raise InvalidConfig(f"cannot parse numeric expression {value!r}")
    out = float(m.group("coef")) if m.group("coef") else 1.0
    if m.group("pi"):
        out *= math.pi
    if m.group("div"):
        out /= float(m.group("div"))
    return -out if m.group("sign") else out


def _check_keys(block: dict, allowed: set, name: str):
    unknown = set(block) - allowed
    if unknown:
        raise InvalidConfig(f"unknown keys in {name!r}: {sorted(unknown)}")


def build_cylinder(scenario: dict) -> CylinderConfig:
    _check_keys(scenario, _SCENARIO_KEYS, "scenario")
    kind = scenario.get("kind")
    if kind not in ("planar-strip", "right-wedge"):
        raise InvalidConfig(f"scenario.kind must be planar-strip or right-wedge, "
                            f"got {kind!r}")
    r = parse_number(scenario.get("r", 1.0))
    gamma = parse_number(scenario["gamma"]) if "gamma" in scenario else None
    if gamma is None:
        raise InvalidConfig("scenario.gamma is required")
    if kind == "planar-strip":
        return CylinderConfig(Scenario.PLANAR_STRIP, r=r, gamma=gamma)
    if "beta" not in scenario or "convexity" not in scenario:
        raise InvalidConfig("right-wedge requires scenario.beta and scenario.convexity")
    conv = scenario["convexity"]
    if conv not in ("convex", "concave"):
        raise InvalidConfig(f"convexity must be convex or concave, got {conv!r}")
    return CylinderConfig(Scenario.RIGHT_WEDGE, r=r, gamma=gamma,
                          beta=parse_number(scenario["beta"]),
                          convexity=Convexity(conv))


def load_runconfig(path: str) -> dict:
    """Parse and validate a configuration document; returns the raw blocks."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidConfig("config document must be a JSON object")
    _check_keys(doc, _TOP_KEYS, "config")
    for key, allowed in (("scenario", _SCENARIO_KEYS), ("numerics", _NUMERICS_KEYS),
                         ("task", _TASK_KEYS), ("output", _OUTPUT_KEYS)):
        block = doc.get(key, {})
        if not isinstance(block, dict):
            raise InvalidConfig(f"config block {key!r} must be an object")
        _check_keys(block, allowed, key)
    numerics = dict(NUMERICS_DEFAULTS)
    numerics.update(doc.get("numerics", {}))
    for k in ("nt", "ns", "oracle_ns"):
        if not isinstance(numerics[k], int) or numerics[k] < 4:
            raise InvalidConfig(f"numerics.{k} must be an integer >= 4")
    return {"scenario": doc.get("scenario"), "numerics": numerics,
            "numerics_explicit": sorted(doc.get("numerics", {})),
            "task": doc.get("task", {}), "output": doc.get("output", {})}
