"""Run orchestration: single solves, parameter sweeps and report files.

All JSON is written with sorted keys and non-finite numbers as ``null``;
CSV floats use ``repr`` so reruns with the same config are byte-identical.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, validate, with_overrides
from .functional import energy_value
from .modular import modular_X
from .pohozaev import RegularityError, pohozaev_terms, positivity_margin, regularity_diagnostics
from .solver import NumericError, Problem, SolveConfig, SolveResult, minimize
from .thresholds import (
    ThresholdError,
    constants_for,
    decay_envelopes,
    estimate_gn_constant,
    threshold_c0,
    trial_bound_check,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

TRACE_COLUMNS = ["iter", "energy", "mass_error", "step", "kkt", "norm_X"]
SUMMARY_COLUMNS = [
    "sweep", "value", "c", "sigma", "gamma_c", "lambda_c", "rho_X", "norm_X", "kkt", "converged",
    "pohozaev_residual", "R", "envelope_nominal", "envelope_derived", "envelope_looser", "error",
]


# ---------------------------------------------------------------- serialisation


def clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: Path, obj) -> None:
    path.write_text(dumps(obj))


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def write_csv(path: Path, columns, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    path.write_text(buf.getvalue())


# ---------------------------------------------------------------- pieces


def threshold_block(cfg: RunConfig, sigma: float) -> dict:
    """Admissibility, Gaussian constants, thresholds and the trial check."""
    grid, p, q, k = cfg.grid, cfg.p, cfg.q, cfg.k
    out = {"admissibility": cfg.admissibility.to_dict(), "notes": list(cfg.warnings)}
    consts = constants_for(p, grid, k)
    out["gaussian_constants"] = consts.to_dict()
    try:
        K = estimate_gn_constant(grid, p, q, size=int(cfg.raw["gn_samples"]), seed=cfg.seed)
        out["K_alpha_estimate"] = K
        out["thresholds"] = threshold_c0(sigma, p, q, grid, K, k).to_dict()
    except (ThresholdError, ValueError) as exc:
        out["thresholds"] = None
        out["threshold_error"] = str(exc)
    out["trial"] = {str(c): trial_bound_check(c, p, grid, k) for c in cfg.c_values}
    pm, pp = p.bounds(grid)
    out["decay_envelopes"] = {str(c): decay_envelopes(c, pm, pp, consts) for c in cfg.c_values}
    return out


def solve_config(cfg: RunConfig, c: float) -> SolveConfig:
    s = cfg.solve
    return SolveConfig(c=c, sigma=float(s["sigma"]), max_iters=int(s["max_iters"]), step0=float(s["step0"]),
                       tol_kkt=float(s["tol_kkt"]), init=s["init"], metric=s["metric"])


def solve(cfg: RunConfig, c: float) -> SolveResult:
    return minimize(Problem(cfg.grid, cfg.p, cfg.q, cfg.k), solve_config(cfg, c))


def pohozaev_block(cfg: RunConfig, res: SolveResult) -> dict:
    u, lam = res.u_c, res.lambda_c
    rep = pohozaev_terms(u, lam, cfg.p, cfg.q, cfg.k)
    out = {"identity": rep.to_dict()}
    pm, pp = cfg.p.bounds(cfg.grid)
    qm, _ = cfg.q.bounds(cfg.grid)
    out["positivity"] = positivity_margin(
        res.gamma_c, modular_X(u, cfg.p, cfg.k), rep.R, pm, pp, qm, cfg.dim
    )
    try:
        out["regularity"] = regularity_diagnostics(u).to_dict()
    except RegularityError as exc:
        out["regularity"] = {"error": str(exc)}
    return out


# ---------------------------------------------------------------- single run


def run_single(cfg: RunConfig, out_dir=None, figures: bool = False, quiet: bool = False) -> int:
    """Solve at the first configured c and write the four reports (plus field.csv)."""
    out = Path(out_dir or cfg.outputs["directory"])
    out.mkdir(parents=True, exist_ok=True)
    fmts = set(cfg.outputs.get("formats", ["json", "csv"]))
    c = cfg.c_values[0]
    sigma = float(cfg.solve["sigma"])

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        thr = threshold_block(cfg, sigma)
        c0 = (thr.get("thresholds") or {}).get("c0")
        if c0 is not None and c > c0:
            warnings.warn(f"c = {c} exceeds the certified level c0 = {c0:.6g}", stacklevel=1)
        try:
            res = solve(cfg, c)
        except NumericError as exc:
            if "json" in fmts:
                write_json(out / "thresholds.json", thr)
                write_json(out / "solve.json", {"c": c, "sigma": sigma, "error": str(exc), "converged": False})
            if "csv" in fmts:
                write_csv(out / "trace.csv", TRACE_COLUMNS, exc.trace)
            log.error("numeric failure: %s", exc)
            return EXIT_NUMERIC
    thr["warnings"] = sorted({str(w.message) for w in caught})

    summary = {"c": c, "sigma": sigma, **res.summary(), "energy": res.gamma_c,
               "rho_X": modular_X(res.u_c, cfg.p, cfg.k), "config": cfg.raw}
    if "json" in fmts:
        write_json(out / "thresholds.json", thr)
        write_json(out / "solve.json", summary)
        write_json(out / "pohozaev.json", pohozaev_block(cfg, res))
    if "csv" in fmts:
        write_csv(out / "trace.csv", TRACE_COLUMNS, res.trace)
        res.u_c.to_csv(out / "field.csv")
    if figures:
        from .report import render_single

        render_single(out, cfg, res)
    if not quiet:
        print(f"c={c:g} gamma_c={res.gamma_c:.10g} lambda_c={res.lambda_c:.10g} "
              f"kkt={res.kkt_residual:.3g} iters={res.iterations} converged={res.converged}")
        for w in thr["warnings"]:
            print(f"warning: {w}")
    return EXIT_OK if res.converged else EXIT_NUMERIC


# ---------------------------------------------------------------- sweeps


def _row_from(cfg: RunConfig, res: SolveResult, sweep: str, value: float, c: float, R=None, resid=None) -> dict:
    pm, pp = cfg.p.bounds(cfg.grid)
    env = decay_envelopes(c, pm, pp, constants_for(cfg.p, cfg.grid, cfg.k))
    if R is None:
        rep = pohozaev_terms(res.u_c, res.lambda_c, cfg.p, cfg.q, cfg.k)
        R, resid = rep.R, rep.relative_residual
    return {
        "sweep": sweep, "value": value, "c": c, "sigma": float(cfg.solve["sigma"]),
        "gamma_c": res.gamma_c, "lambda_c": res.lambda_c,
        "rho_X": modular_X(res.u_c, cfg.p, cfg.k), "norm_X": res.norm_X,
        "kkt": res.kkt_residual, "converged": res.converged,
        "pohozaev_residual": resid, "R": R,
        "envelope_nominal": env["nominal"], "envelope_derived": env["derived"],
        "envelope_looser": env["looser"],
        "error": "" if res.converged else "not converged",
    }


def _sweep_point(job):
    """Worker: (raw config, sweep kind, value) -> summary row."""
    raw, kind, value = job
    row = {"sweep": kind, "value": value}
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cfg = validate(raw)
            c = cfg.c_values[0]
            res = solve(cfg, c)
            row = _row_from(cfg, res, kind, value, c)
    except (NumericError, ConfigError, ValueError, ArithmeticError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def workers(n_jobs: int) -> int:
    env = os.environ.get("VARD_WORKERS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise ConfigError(f"VARD_WORKERS must be an integer (got {env!r})") from None
    return max(1, min(cap, n_jobs))


def _map_ordered(fn, jobs):
    n = workers(len(jobs))
    if n == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, jobs))  # map preserves input order


def _with_r0(spec: dict, r0: float) -> dict:
    if spec.get("kind") != "class_P":
        return spec
    return {**spec, "r0": r0}


def run_sweep(cfg: RunConfig, kind: str, values, out_dir=None, figures: bool = False, quiet: bool = False) -> tuple[int, list]:
    """Sweep over c, sigma or r0 and write summary.csv; returns (exit code, rows)."""
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("sweep list is empty")
    if kind not in ("c", "sigma", "r0"):
        raise ConfigError(f"unknown sweep kind {kind!r}")
    out = Path(out_dir or cfg.outputs["directory"])
    out.mkdir(parents=True, exist_ok=True)

    if kind == "r0":
        prob = cfg.raw["problem"]
        if prob["p"].get("kind") != "class_P" and prob["q"].get("kind") != "class_P":
            raise ConfigError("an r0 sweep needs a class_P exponent for p or q")
        # one solve, then the remainder on the fixed field for each r0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            c = cfg.c_values[0]
            res = solve(cfg, c)
        rows = []
        for r0 in values:
            row = {"sweep": kind, "value": r0}
            try:
                sub = with_overrides(cfg, {"problem.p": _with_r0(prob["p"], r0),
                                           "problem.q": _with_r0(prob["q"], r0)})
                rep = pohozaev_terms(res.u_c, res.lambda_c, sub.p, sub.q, sub.k)
                row = _row_from(sub, res, kind, r0, c, rep.R, rep.relative_residual)
                row["gamma_c"] = energy_value(res.u_c, sub.p, sub.q, sub.k)
            except (ConfigError, ValueError, ArithmeticError) as exc:
                row["error"] = f"{type(exc).__name__}: {exc}"
            rows.append(row)
    else:
        jobs = []
        for v in values:
            raw = json.loads(json.dumps(cfg.raw))
            raw["solve"]["c" if kind == "c" else "sigma"] = v
            jobs.append((raw, kind, v))
        rows = _map_ordered(_sweep_point, jobs)

    write_csv(out / "summary.csv", SUMMARY_COLUMNS, rows)
    if figures:
        from .report import render_sweep

        render_sweep(out, kind, rows)
    failed = [r for r in rows if r.get("error")]
    if not quiet:
        for r in rows:
            status = r.get("error") or "ok"
            print(f"{kind}={r['value']:g} rho_X={_cell(r.get('rho_X'))} R={_cell(r.get('R'))} {status}")
    return (EXIT_NUMERIC if failed else EXIT_OK), rows
