"""Run configuration: a single JSON document merged over built-in defaults.

Canonical form (all keys present, sorted) is what gets hashed into the run
manifest; ``to_dict`` of a parsed config parses back to the same config.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
import re
from dataclasses import dataclass

from .errors import ConfigError
from .qubit import NAMED_STATES

DELTA_UNITS = ("gamma", "MHz")
DIRECTIONS = ("forward", "backward")

DEFAULTS = {
    "delta_range": [-3.0, 3.0, 121],
    "delta_unit": "gamma",
    "depth": 14.0,
    "depth_range": [0.0, 40.0, 41],
    "helicity": 1,
    "directions": ["forward", "backward"],
    "qubit_states": ["H", "V", "D", "R"],
    "shots": 10000,
    "seed": 0,
    "noise_floor": "calibrated",
    "calibration": None,
    "model": {
        "omega_c": None,
        "omega_diss": None,
        "gamma_gs": None,
        "omega_p": 0.01,
        "delta_c": 0.0,
        "f_g": 2,
        "f_e": 3,
        "populations": None,
        "count_cycling_twice": False,
        "coherent_backward_sum": False,
    },
    "storage": {
        "write_ns": 1000.0,
        "dark_ns": 500.0,
        "read_ns": 1000.0,
        "edge_ns": 50.0,
        "fwhm_ns": 300.0,
        "control_peak": None,
        "dt": 0.1,
    },
}


@dataclass(frozen=True)
class QubitSpec:
    label: str
    theta: float
    phi: float


@dataclass(frozen=True)
class Config:
    raw: dict

    def __getitem__(self, key):
        return self.raw[key]

    @property
    def qubit_states(self):
        out = []
        for s in self.raw["qubit_states"]:
            if isinstance(s, str):
                q = NAMED_STATES[s]
                out.append(QubitSpec(s, q.theta, q.phi))
            else:
                out.append(QubitSpec(s["label"], float(s["theta"]), float(s["phi"])))
        return out

    def to_dict(self):
        return copy.deepcopy(self.raw)

    def canonical_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"), allow_nan=False)

    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def _line_of(text, key):
    if not text:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _num(v, field, text, *, lo=None, hi=None, integer=False, lo_open=False):
    line = _line_of(text, field.split(".")[-1])
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", field, line)
    if integer and (not float(v).is_integer()):
        raise ConfigError(f"expected an integer, got {v!r}", field, line)
    if not math.isfinite(v):
        raise ConfigError("must be finite", field, line)
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise ConfigError(f"must be {'>' if lo_open else '>='} {lo}, got {v}", field, line)
    if hi is not None and v > hi:
        raise ConfigError(f"must be <= {hi}, got {v}", field, line)
    return int(v) if integer else float(v)


def _range(v, field, text, lo=None):
    line = _line_of(text, field)
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise ConfigError("expected [min, max, steps]", field, line)
    a = _num(v[0], field, text, lo=lo)
    b = _num(v[1], field, text, lo=lo)
    n = _num(v[2], field, text, lo=1, integer=True)
    if a > b:
        raise ConfigError("min must not exceed max", field, line)
    if n == 1 and a != b:
        raise ConfigError("a single step needs min == max", field, line)
    return [a, b, n]


def _merge(base, over, text, prefix=""):
    out = copy.deepcopy(base)
    for k, v in over.items():
        path = prefix + k
        if k not in base:
            raise ConfigError("unknown field", path, _line_of(text, k))
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError("expected an object", path, _line_of(text, k))
            out[k] = _merge(base[k], v, text, path + ".")
        else:
            out[k] = copy.deepcopy(v)
    return out


def _validate(c, text):
    c["delta_range"] = _range(c["delta_range"], "delta_range", text)
    if c["delta_unit"] not in DELTA_UNITS:
        raise ConfigError(f"must be one of {DELTA_UNITS}", "delta_unit", _line_of(text, "delta_unit"))
    c["depth"] = _num(c["depth"], "depth", text, lo=0)
    c["depth_range"] = _range(c["depth_range"], "depth_range", text, lo=0)
    if c["helicity"] not in (1, -1) or isinstance(c["helicity"], bool):
        raise ConfigError("must be +1 or -1", "helicity", _line_of(text, "helicity"))
    c["helicity"] = int(c["helicity"])
    dirs = c["directions"]
    if not isinstance(dirs, list) or not dirs or any(d not in DIRECTIONS for d in dirs) or len(set(dirs)) != len(dirs):
        raise ConfigError(f"must be a non-empty subset of {DIRECTIONS}", "directions", _line_of(text, "directions"))
    c["directions"] = [d for d in DIRECTIONS if d in dirs]
    states = c["qubit_states"]
    if not isinstance(states, list):
        raise ConfigError("expected a list", "qubit_states", _line_of(text, "qubit_states"))
    clean = []
    for i, s in enumerate(states):
        f = f"qubit_states[{i}]"
        if isinstance(s, str):
            if s not in NAMED_STATES:
                raise ConfigError(f"unknown state {s!r}", f, _line_of(text, "qubit_states"))
            clean.append(s)
        elif isinstance(s, dict) and set(s) == {"label", "theta", "phi"} and isinstance(s["label"], str):
            clean.append({"label": s["label"], "theta": _num(s["theta"], f + ".theta", text, lo=0, hi=math.pi),
                          "phi": _num(s["phi"], f + ".phi", text)})
        else:
            raise ConfigError("expected a state name or {label, theta, phi}", f, _line_of(text, "qubit_states"))
    c["qubit_states"] = clean
    c["shots"] = _num(c["shots"], "shots", text, lo=0, integer=True)
    c["seed"] = _num(c["seed"], "seed", text, lo=0, integer=True)
    if c["noise_floor"] != "calibrated":
        c["noise_floor"] = _num(c["noise_floor"], "noise_floor", text, lo=0)
    if c["calibration"] is not None and not isinstance(c["calibration"], str):
        raise ConfigError("expected a file path or null", "calibration", _line_of(text, "calibration"))
    m = c["model"]
    for k in ("omega_c", "omega_diss", "gamma_gs"):
        if m[k] is not None:
            m[k] = _num(m[k], "model." + k, text, lo=0)
    m["omega_p"] = _num(m["omega_p"], "model.omega_p", text, lo=0, hi=0.1, lo_open=True)
    m["delta_c"] = _num(m["delta_c"], "model.delta_c", text)
    m["f_g"] = _num(m["f_g"], "model.f_g", text, lo=0, integer=True)
    m["f_e"] = _num(m["f_e"], "model.f_e", text, lo=1, integer=True)
    if m["populations"] is not None:
        pops = m["populations"]
        if not isinstance(pops, list) or len(pops) != 2 * m["f_g"] + 1:
            raise ConfigError("need 2*f_g+1 populations", "model.populations", _line_of(text, "populations"))
        m["populations"] = [_num(p, "model.populations", text, lo=0) for p in pops]
        if abs(sum(m["populations"]) - 1) > 1e-12:
            raise ConfigError("populations must sum to 1", "model.populations", _line_of(text, "populations"))
    for k in ("count_cycling_twice", "coherent_backward_sum"):
        if not isinstance(m[k], bool):
            raise ConfigError("expected true or false", "model." + k, _line_of(text, k))
    s = c["storage"]
    for k in ("write_ns", "dark_ns", "read_ns", "edge_ns", "fwhm_ns", "dt"):
        s[k] = _num(s[k], "storage." + k, text, lo=0, lo_open=True)
    if s["control_peak"] is not None:
        s["control_peak"] = _num(s["control_peak"], "storage.control_peak", text, lo=0)
    return c


def parse_config(text: str | None = None) -> Config:
    """Parse a JSON config (``None`` means all defaults)."""
    over = {}
    if text is not None:
        try:
            over = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON: {e.msg}", None, e.lineno) from None
        if not isinstance(over, dict):
            raise ConfigError("top level must be an object", None, 1)
        if "delta_range" in over and "delta_unit" not in over:
            raise ConfigError("delta_range given without an explicit delta_unit", "delta_unit",
                              _line_of(text, "delta_range"))
    return Config(_validate(_merge(DEFAULTS, over, text), text))


def load_config(path) -> Config:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e.strerror}", str(path)) from None
    return parse_config(text)


def apply_override(cfg: Config, assignment: str) -> Config:
    """``dotted.path=<json value>`` applied on top of ``cfg``."""
    if "=" not in assignment:
        raise ConfigError("override must look like key=value", assignment)
    key, value = assignment.split("=", 1)
    try:
        v = json.loads(value)
    except json.JSONDecodeError:
        v = value
    raw = cfg.to_dict()
    node = raw
    parts = key.split(".")
    for p in parts[:-1]:
        if not isinstance(node.get(p), dict):
            raise ConfigError("unknown field", key)
        node = node[p]
    if parts[-1] not in node:
        raise ConfigError("unknown field", key)
    node[parts[-1]] = v
    return Config(_validate(raw, None))
