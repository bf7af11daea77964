"""Scenario files: JSON parsing, validation and defaulting.

Schema tag ``lar-dyn/1``. A scenario names a generator, an initial state, a
time grid and a list of tasks. Validation errors carry a dotted field path.
"""

from dataclasses import dataclass, field
import json
import math

import numpy as np

from .errors import ScenarioParseError, ScenarioValidationError
from .linalg import SYMMETRY_TOL
from .rng import random_generator

SCHEMA = "lar-dyn/1"
TASKS = ("onshell", "lifted", "clar", "holonomy", "interference", "contexts", "invariants")
RANDOM_KINDS = ("general", "symmetric", "skew", "split")
LOTTERY_SUM_TOL = 1e-12
MAX_SEED = (1 << 64) - 1

_TOP_KEYS = {"schema", "name", "n", "seed", "generator", "initial", "time", "tasks", "params"}


@dataclass
class Scenario:
    name: str
    n: int
    generator: dict
    initial: dict
    time: dict
    tasks: list
    params: dict = field(default_factory=dict)
    seed: int = 0
    schema: str = SCHEMA
    V: np.ndarray = None
    generator_kind: str = ""

    @property
    def times(self):
        t = self.time
        return np.linspace(t["t_start"], t["t_end"], t["samples"])

    def echo(self):
        """Defaulted scenario as plain JSON-ready data."""
        return {
            "schema": self.schema, "name": self.name, "n": self.n, "seed": self.seed,
            "generator": self.generator, "initial": self.initial, "time": self.time,
            "tasks": list(self.tasks), "params": self.params,
        }


def _fail(path, msg):
    raise ScenarioValidationError(path, msg)


def _number(x, path):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        _fail(path, "expected a number")
    x = float(x)
    if not math.isfinite(x):
        _fail(path, "must be finite")
    return x


def _int(x, path, lo=None, hi=None):
    if isinstance(x, bool) or not isinstance(x, int):
        if isinstance(x, float) and x.is_integer():
            x = int(x)
        else:
            _fail(path, "expected an integer")
    if lo is not None and x < lo:
        _fail(path, f"must be >= {lo}")
    if hi is not None and x > hi:
        _fail(path, f"must be <= {hi}")
    return x


def _vector(x, n, path):
    if not isinstance(x, list):
        _fail(path, "expected a list of numbers")
    if len(x) != n:
        _fail(path, f"expected length {n}, got {len(x)}")
    return np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(x)])


def _matrix(x, n, path):
    if not isinstance(x, list) or len(x) != n:
        _fail(path, f"expected {n} rows")
    return np.array([_vector(row, n, f"{path}[{i}]") for i, row in enumerate(x)])


def _one_key(d, allowed, path):
    if not isinstance(d, dict):
        _fail(path, "expected an object")
    keys = [k for k in d if k in allowed]
    extra = [k for k in d if k not in allowed]
    if extra:
        _fail(f"{path}.{extra[0]}", f"unknown key; expected one of {sorted(allowed)}")
    if len(keys) != 1:
        _fail(path, f"expected exactly one of {sorted(allowed)}")
    return keys[0]


def _generator(g, n, seed_override, path="generator"):
    kind = _one_key(g, {"matrix", "split", "diagonal", "random"}, path)
    if kind == "matrix":
        V = _matrix(g["matrix"], n, f"{path}.matrix")
        return V, {"matrix": V.tolist()}, kind
    if kind == "split":
        sp = g["split"]
        if not isinstance(sp, dict) or set(sp) != {"S", "F"}:
            _fail(f"{path}.split", "expected keys S and F")
        S = _matrix(sp["S"], n, f"{path}.split.S")
        F = _matrix(sp["F"], n, f"{path}.split.F")
        if np.linalg.norm(S - S.T) > SYMMETRY_TOL * max(1.0, np.linalg.norm(S)):
            _fail(f"{path}.split.S", "not symmetric within tolerance")
        if np.linalg.norm(F + F.T) > SYMMETRY_TOL * max(1.0, np.linalg.norm(F)):
            _fail(f"{path}.split.F", "not skew-symmetric within tolerance")
        return S + F, {"split": {"S": S.tolist(), "F": F.tolist()}}, kind
    if kind == "diagonal":
        th = _vector(g["diagonal"], n, f"{path}.diagonal")
        return np.diag(th), {"diagonal": th.tolist()}, kind
    r = g["random"]
    rp = f"{path}.random"
    if not isinstance(r, dict):
        _fail(rp, "expected an object")
    unknown = set(r) - {"seed", "scale", "kind", "s_scale", "f_scale"}
    if unknown:
        _fail(f"{rp}.{sorted(unknown)[0]}", "unknown key")
    seed = _int(r.get("seed", 0), f"{rp}.seed", 0, MAX_SEED)
    if seed_override is not None:
        seed = seed_override
    scale = _number(r.get("scale", 1.0), f"{rp}.scale")
    fam = r.get("kind", "general")
    if fam not in RANDOM_KINDS:
        _fail(f"{rp}.kind", f"expected one of {list(RANDOM_KINDS)}")
    s_scale = _number(r.get("s_scale", 1.0), f"{rp}.s_scale")
    f_scale = _number(r.get("f_scale", 1.0), f"{rp}.f_scale")
    V = random_generator(n, seed, scale, fam, s_scale, f_scale)
    echo = {"random": {"seed": seed, "scale": scale, "kind": fam,
                       "s_scale": s_scale, "f_scale": f_scale}}
    return V, echo, "random"


def _initial(x, n, path="initial"):
    kind = _one_key(x, {"lottery", "amplitude", "phase"}, path)
    if kind == "lottery":
        q = _vector(x["lottery"], n, f"{path}.lottery")
        if np.any(q < 0):
            _fail(f"{path}.lottery", "entries must be nonnegative")
        if abs(q.sum() - 1.0) > LOTTERY_SUM_TOL * n:
            _fail(f"{path}.lottery", f"entries must sum to 1 (sum={float(q.sum())!r})")
        if np.min(q) <= 0:
            _fail(f"{path}.lottery", "lottery must be interior (all entries positive)")
        return {"lottery": q.tolist()}
    if kind == "amplitude":
        r = _vector(x["amplitude"], n, f"{path}.amplitude")
        if not np.any(r):
            _fail(f"{path}.amplitude", "amplitude must be nonzero")
        return {"amplitude": r.tolist()}
    ph = x["phase"]
    pp = f"{path}.phase"
    if not isinstance(ph, dict) or set(ph) != {"rho", "y"}:
        _fail(pp, "expected keys rho and y")
    r = _vector(ph["rho"], n, f"{pp}.rho")
    y = _vector(ph["y"], n, f"{pp}.y")
    if not np.any(r):
        _fail(f"{pp}.rho", "amplitude must be nonzero")
    return {"phase": {"rho": r.tolist(), "y": y.tolist()}}


def _time(t, path="time"):
    if isinstance(t, list):
        if len(t) != 3:
            _fail(path, "expected [t_start, t_end, samples]")
        t = {"t_start": t[0], "t_end": t[1], "samples": t[2]}
    if not isinstance(t, dict):
        _fail(path, "expected an object or a 3-element list")
    unknown = set(t) - {"t_start", "t_end", "samples"}
    if unknown:
        _fail(f"{path}.{sorted(unknown)[0]}", "unknown key")
    t0 = _number(t.get("t_start", 0.0), f"{path}.t_start")
    if "t_end" not in t:
        _fail(f"{path}.t_end", "missing")
    t1 = _number(t["t_end"], f"{path}.t_end")
    m = _int(t.get("samples", 101), f"{path}.samples", 2)
    if not t1 > t0:
        _fail(f"{path}.t_end", "must exceed t_start")
    return {"t_start": t0, "t_end": t1, "samples": m}


def _params(p, n, tasks, path="params"):
    if p is None:
        p = {}
    if not isinstance(p, dict):
        _fail(path, "expected an object")
    out = {}
    for key, val in p.items():
        kp = f"{path}.{key}"
        if key == "contexts":
            if not isinstance(val, list) or not val:
                _fail(kp, "expected a non-empty list")
            ctx = []
            for i, c in enumerate(val):
                cp = f"{kp}[{i}]"
                if isinstance(c, (int, float)) and not isinstance(c, bool):
                    if n != 2:
                        _fail(cp, "rotation angles are only defined for n = 2")
                    ctx.append(_number(c, cp))
                else:
                    B = _matrix(c, n, cp)
                    if np.linalg.norm(B.T @ B - np.eye(n)) > 1e-10:
                        _fail(cp, "context matrix is not orthogonal")
                    ctx.append(B.tolist())
            out[key] = ctx
        elif key == "loop":
            if isinstance(val, dict):
                unknown = set(val) - {"center", "radius", "samples"}
                if unknown:
                    _fail(f"{kp}.{sorted(unknown)[0]}", "unknown key")
                center = _vector(val.get("center", [1.0 / n] * n), n, f"{kp}.center")
                if abs(center.sum() - 1) > 1e-12 or np.min(center) <= 0:
                    _fail(f"{kp}.center", "must be an interior lottery")
                radius = _number(val.get("radius", 0.05), f"{kp}.radius")
                if radius <= 0:
                    _fail(f"{kp}.radius", "must be positive")
                samples = _int(val.get("samples", 256), f"{kp}.samples", 4)
                out[key] = {"center": center.tolist(), "radius": radius, "samples": samples}
            elif isinstance(val, list):
                if len(val) < 4:
                    _fail(kp, "loop needs at least 4 samples")
                pts = [_vector(v, n, f"{kp}[{i}]").tolist() for i, v in enumerate(val)]
                out[key] = pts
            else:
                _fail(kp, "expected a list of lotteries or a circle object")
        elif key == "polarization":
            if not isinstance(val, dict) or set(val) != {"R"}:
                _fail(kp, "expected an object with key R")
            R = _matrix(val["R"], n, f"{kp}.R")
            if np.linalg.norm(R - R.T) > SYMMETRY_TOL * max(1.0, np.linalg.norm(R)):
                _fail(f"{kp}.R", "must be symmetric")
            out[key] = {"R": R.tolist()}
        elif key == "horizon":
            h = _number(val, kp)
            if h <= 0:
                _fail(kp, "must be positive")
            out[key] = h
        elif key == "invariant_seeds":
            if not isinstance(val, list) or not val:
                _fail(kp, "expected a non-empty list of integers")
            out[key] = [_int(s, f"{kp}[{i}]", 0, MAX_SEED) for i, s in enumerate(val)]
        else:
            _fail(kp, "unknown parameter")
    if "holonomy" in tasks and "loop" not in out:
        if n < 3:
            _fail(f"{path}.loop", "holonomy with n < 3 needs an explicit loop")
        out["loop"] = {"center": [1.0 / n] * n, "radius": 0.05, "samples": 256}
    if "contexts" in tasks and "contexts" not in out:
        _fail(f"{path}.contexts", "the contexts task needs at least one context")
    return out


def validate_scenario(data, seed_override=None):
    """Validate parsed JSON and return a defaulted Scenario."""
    if not isinstance(data, dict):
        _fail("$", "scenario must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        _fail(sorted(unknown)[0], "unknown key")
    schema = data.get("schema", SCHEMA)
    if schema != SCHEMA:
        _fail("schema", f"unsupported schema {schema!r}; expected {SCHEMA!r}")
    name = data.get("name", "scenario")
    if not isinstance(name, str) or not name:
        _fail("name", "expected a non-empty string")
    if "n" not in data:
        _fail("n", "missing")
    n = _int(data["n"], "n", 1)
    seed = _int(data.get("seed", 0), "seed", 0, MAX_SEED)
    if seed_override is not None:
        seed = _int(seed_override, "seed", 0, MAX_SEED)
    for key in ("generator", "initial", "time", "tasks"):
        if key not in data:
            _fail(key, "missing")
    V, gen_echo, gen_kind = _generator(data["generator"], n, seed_override)
    initial = _initial(data["initial"], n)
    time = _time(data["time"])
    tasks = data["tasks"]
    if not isinstance(tasks, list) or not tasks:
        _fail("tasks", "expected a non-empty list")
    for i, t in enumerate(tasks):
        if t not in TASKS:
            _fail(f"tasks[{i}]", f"unknown task {t!r}; expected one of {list(TASKS)}")
    if len(set(tasks)) != len(tasks):
        _fail("tasks", "duplicate task")
    params = _params(data.get("params"), n, tasks)
    return Scenario(name, n, gen_echo, initial, time, list(tasks), params, seed,
                    SCHEMA, V, gen_kind)


def parse_scenario_text(text, seed_override=None):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"invalid JSON: {exc}") from exc
    return validate_scenario(data, seed_override)


def load_scenario(path, seed_override=None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc}") from exc
    return parse_scenario_text(text, seed_override)
