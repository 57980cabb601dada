"""Run configuration: JSON schema, validation and object construction.

Keys starting with ``_`` are treated as comments and ignored anywhere in
the file.  See ``configs/default.json`` for an annotated example.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .exponents import (
    ExponentError,
    ExponentField,
    INNER_PROFILES,
    check_admissibility,
    gaussian_exponent,
    make_class_P_exponent,
    make_constant_exponent,
    make_inner_profile,
)
from .grid import Grid, GridError, build_grid


class ConfigError(ValueError):
    """Invalid run configuration; ``problems`` lists every violation."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


DEFAULTS = {
    "problem": {"N": 1, "k": 2.0, "p": {"kind": "constant", "p0": 2.0}, "q": {"kind": "constant", "p0": 4.0}},
    "grid": {"mode": "tensor", "L": 6.0, "n": 1024},
    "solve": {"c": 0.05, "sigma": 1.0, "tol_kkt": 1e-6, "max_iters": 2000, "init": "trial",
              "step0": 1.0, "metric": "sobolev"},
    "outputs": {"directory": "out", "formats": ["json", "csv"], "figures": False},
    "seed": 0,
    "gn_samples": 200,
}

_EXPONENT_KEYS = {
    "constant": {"p0"},
    "gaussian": {"p_min", "p_max", "width"},
    "class_P": {"p0", "r0", "inner"},
}


def _strip_comments(obj):
    if isinstance(obj, dict):
        return {k: _strip_comments(v) for k, v in obj.items() if not str(k).startswith("_")}
    if isinstance(obj, list):
        return [_strip_comments(v) for v in obj]
    return obj


def _merge(base, over):
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict) and key not in ("p", "q"):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def build_exponent(spec: dict) -> ExponentField:
    """ExponentField from a config block; raises ExponentError or ConfigError."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("exponent spec must be an object with a 'kind'")
    kind = spec["kind"]
    if kind not in _EXPONENT_KEYS:
        raise ConfigError(f"unknown exponent kind {kind!r}; choose from {sorted(_EXPONENT_KEYS)}")
    extra = set(spec) - _EXPONENT_KEYS[kind] - {"kind"}
    if extra:
        raise ConfigError(f"unexpected keys for {kind} exponent: {sorted(extra)}")
    try:
        if kind == "constant":
            return make_constant_exponent(float(spec["p0"]))
        if kind == "gaussian":
            return gaussian_exponent(float(spec["p_min"]), float(spec["p_max"]), float(spec.get("width", 1.0)))
        inner = dict(spec.get("inner") or {"profile": "constant"})
        name = inner.pop("profile", "constant")
        if name not in INNER_PROFILES:
            raise ConfigError(f"unknown inner profile {name!r}; choose from {sorted(INNER_PROFILES)}")
        p0, r0 = float(spec["p0"]), float(spec["r0"])
        if not r0 > 0:
            raise ConfigError("r0 must be positive")
        return make_class_P_exponent(p0, make_inner_profile(name, p0, r0, **inner), r0)
    except KeyError as exc:
        raise ConfigError(f"{kind} exponent missing key {exc.args[0]!r}") from None
    except TypeError as exc:
        raise ConfigError(f"bad {kind} exponent parameters: {exc}") from None


@dataclass
class RunConfig:
    raw: dict
    grid: Grid
    p: ExponentField
    q: ExponentField
    admissibility: object = None
    warnings: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return int(self.raw["problem"]["N"])

    @property
    def k(self) -> float:
        return float(self.raw["problem"]["k"])

    @property
    def solve(self) -> dict:
        return self.raw["solve"]

    @property
    def outputs(self) -> dict:
        return self.raw["outputs"]

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    @property
    def c_values(self) -> list:
        c = self.solve["c"]
        return [float(v) for v in c] if isinstance(c, list) else [float(c)]


def validate(raw: dict) -> RunConfig:
    """Build and validate a RunConfig from an already-parsed dict."""
    raw = _merge(DEFAULTS, _strip_comments(raw))
    problems = []
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        problems.append(f"unknown top-level keys: {sorted(unknown)}")

    prob, gcfg, scfg = raw["problem"], raw["grid"], raw["solve"]
    try:
        dim = int(prob["N"])
        k = float(prob["k"])
    except (TypeError, ValueError):
        raise ConfigError("problem.N must be an integer and problem.k a number") from None
    if not math.isfinite(k) or k < 0:
        problems.append("problem.k must be finite and >= 0")

    grid = None
    try:
        grid = build_grid(dim, str(gcfg["mode"]), float(gcfg["L"]), int(gcfg["n"]))
    except (GridError, ValueError, TypeError) as exc:
        problems.append(f"grid: {exc}")

    exps = {}
    for name in ("p", "q"):
        try:
            exps[name] = build_exponent(prob[name])
        except (ConfigError, ExponentError) as exc:
            problems.append(f"problem.{name}: {exc}")

    c = scfg["c"]
    cs = c if isinstance(c, list) else [c]
    if not cs:
        problems.append("solve.c list is empty")
    for v in cs:
        if not isinstance(v, (int, float)) or not v > 0:
            problems.append(f"solve.c values must be positive numbers (got {v!r})")
    for key, lo in (("sigma", 0.0), ("tol_kkt", 0.0), ("step0", 0.0)):
        v = scfg.get(key)
        if not isinstance(v, (int, float)) or not v > lo:
            problems.append(f"solve.{key} must be a positive number")
    if not isinstance(scfg.get("max_iters"), int) or scfg["max_iters"] < 1:
        problems.append("solve.max_iters must be a positive integer")
    if scfg.get("init") != "trial":
        problems.append("solve.init must be 'trial'")
    if scfg.get("metric") not in ("sobolev", "l2"):
        problems.append("solve.metric must be 'sobolev' or 'l2'")
    fmts = raw["outputs"].get("formats", [])
    if not isinstance(fmts, list) or not set(fmts) <= {"json", "csv"}:
        problems.append("outputs.formats must be a subset of ['json', 'csv']")
    if not isinstance(raw["seed"], int):
        problems.append("seed must be an integer")

    report = None
    notes = []
    if grid is not None and len(exps) == 2:
        report = check_admissibility(exps["p"], exps["q"], dim, k, grid)
        for name in report.violations():
            problems.append(f"admissibility: {name} violated")
        if report.surrogate and not report.violations():
            notes.append(
                f"p+ = {report.p_plus:g} >= N = {dim}: dimension below the theory range, "
                "q-thresholds reported but not enforced"
            )
    if problems:
        raise ConfigError(problems)
    return RunConfig(raw=raw, grid=grid, p=exps["p"], q=exps["q"], admissibility=report, warnings=notes)


def parse_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return validate(raw)


def with_overrides(cfg: RunConfig, changes: dict) -> RunConfig:
    """Re-validated copy with dotted-path overrides, e.g. ``{"solve.c": 0.02}``."""
    raw = copy.deepcopy(cfg.raw)
    for dotted, value in changes.items():
        node = raw
        keys = dotted.split(".")
        for key in keys[:-1]:
            node = node[key]
        node[keys[-1]] = value
    return validate(raw)
