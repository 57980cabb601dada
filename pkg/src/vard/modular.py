"""Modulars and Luxemburg norms on weighted variable exponent spaces.

For an exponent p(x) and weight |x|^k the modular is

    rho(u) = int |x|^k |u(x)|^p(x) dx

and the Luxemburg norm is the unique eta > 0 with rho(u / eta) = 1.  On
W^{1,p(x)}(|x|^k) two modulars are used, rho_X = int |grad u|^p + rho(u) and
its 1/p-weighted variant.  ``norm_X`` is the sum of the two Luxemburg norms;
``modular_norm_X`` is the Luxemburg norm induced by rho_X itself, which is
the norm for which the modular/norm power bounds are exact.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from ._roots import decreasing_root
from .exponents import ExponentField
from .grid import ScalarField


@dataclass(frozen=True)
class ModularSpec:
    exponent: ExponentField
    k: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.k) or self.k < 0:
            raise ValueError("weight power k must be finite and >= 0")


def power_sum(values, exps, weights) -> float:
    """sum_i w_i |v_i|^(p_i), with 0^p = 0."""
    a = np.abs(values)
    return float(np.dot(weights, np.where(a > 0, a, 0.0) ** exps))


def luxemburg(values, exps, weights, rtol: float = 1e-13) -> float:
    """Luxemburg norm of the sampled function defined by ``values``.

    Solves sum w |v / eta|^p = 1; the map eta -> modular is strictly
    decreasing, and the start eta0 = max(rho^(1/p+), rho^(1/p-)) lies inside
    the bracket implied by the modular power bounds.
    """
    values = np.asarray(values, dtype=float)
    exps = np.broadcast_to(np.asarray(exps, dtype=float), values.shape)
    weights = np.broadcast_to(np.asarray(weights, dtype=float), values.shape)
    mask = (values != 0) & (weights > 0)
    if not np.any(mask):
        return 0.0
    a = np.abs(values[mask])
    p = exps[mask]
    w = weights[mask]
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(p))):
        raise FloatingPointError("non-finite values in Luxemburg norm")
    loga = np.log(a)
    logw = np.log(w)

    def rho(eta):
        return float(np.sum(np.exp(logw + p * (loga - math.log(eta)))))

    r1 = rho(1.0)
    pmin, pmax = float(p.min()), float(p.max())
    eta0 = max(r1 ** (1 / pmax), r1 ** (1 / pmin))
    # the equation is smooth in log eta; solve rho(eta) = 1
    return decreasing_root(rho, 1.0, x0=eta0, rtol=rtol)


def _node_parts(u: ScalarField, spec: ModularSpec):
    grid = u.grid
    p = spec.exponent.on_nodes(grid)
    w = grid.weights
    if spec.k:
        w = w * grid.radius**spec.k
    return u.values, p, w


def _grad_parts(u: ScalarField, p: ExponentField):
    samples = u.grid.gradient_samples
    return samples.magnitude(u.values), p.on_samples(u.grid), samples.weights


def modular_lp(u: ScalarField, spec: ModularSpec) -> float:
    return power_sum(*_node_parts(u, spec))


def luxemburg_norm(u: ScalarField, spec: ModularSpec) -> float:
    return luxemburg(*_node_parts(u, spec))


def modular_gradient(u: ScalarField, p: ExponentField) -> float:
    """int |grad u|^p(x) over the gradient samples."""
    return power_sum(*_grad_parts(u, p))


def gradient_norm(u: ScalarField, p: ExponentField) -> float:
    return luxemburg(*_grad_parts(u, p))


def modular_X(u: ScalarField, p: ExponentField, k: float) -> float:
    return modular_gradient(u, p) + modular_lp(u, ModularSpec(p, k))


def modular_X_tilde(u: ScalarField, p: ExponentField, k: float) -> float:
    g, pg, wg = _grad_parts(u, p)
    v, pv, wv = _node_parts(u, ModularSpec(p, k))
    return power_sum(g, pg, wg / pg) + power_sum(v, pv, wv / pv)


def norm_X(u: ScalarField, p: ExponentField, k: float) -> float:
    """||u||_{L^p(|x|^k)} + ||grad u||_{L^p}."""
    return luxemburg_norm(u, ModularSpec(p, k)) + gradient_norm(u, p)


def modular_norm_X(u: ScalarField, p: ExponentField, k: float) -> float:
    """Luxemburg norm induced by rho_X (equivalent to ``norm_X``)."""
    g, pg, wg = _grad_parts(u, p)
    v, pv, wv = _node_parts(u, ModularSpec(p, k))
    return luxemburg(np.concatenate([g, v]), np.concatenate([pg, pv]), np.concatenate([wg, wv]))


# ---------------------------------------------------------------- relations


@dataclass(frozen=True)
class RelationCheck:
    name: str
    applicable: bool
    passed: bool
    margin: float


@dataclass(frozen=True)
class RelationReport:
    norm: float
    modular: float
    norm_X: float
    modular_X: float
    p_minus: float
    p_plus: float
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _trichotomy(name, norm, rho, eq_tol):
    if abs(norm - 1.0) <= 1e-12:
        ok = abs(rho - 1.0) <= eq_tol
        return RelationCheck(name, True, ok, eq_tol - abs(rho - 1.0))
    ok = (norm < 1) == (rho < 1) and rho != 1.0
    return RelationCheck(name, True, ok, abs(rho - 1.0) if ok else -abs(rho - 1.0))


def _power_bounds(name, norm, rho, lo_exp, hi_exp, regime, rtol):
    # regime "above": norm > 1, norm^p- <= rho <= norm^p+; "below": reversed
    if regime == "above":
        applicable = norm > 1
        lo, hi = norm**lo_exp, norm**hi_exp
    else:
        applicable = norm < 1
        lo, hi = norm**hi_exp, norm**lo_exp
    if not applicable:
        return RelationCheck(name, False, True, 0.0)
    slack = rtol * max(abs(rho), 1e-300)
    margin = min(rho - lo, hi - rho)
    return RelationCheck(name, True, margin >= -slack, margin)


def check_modular_norm_relations(u: ScalarField, spec: ModularSpec, eq_tol: float = 1e-10, rtol: float = 1e-10) -> RelationReport:
    """Check the modular/norm relations on L^p(|x|^k) and on X.

    Five relations are checked: the <1/=1/>1 trichotomy and the two power
    bounds (norm > 1, norm < 1) on L^p(|x|^k), and the trichotomy and the
    applicable power bound on X with its modular-induced Luxemburg norm.
    """
    if u.is_zero():
        raise ValueError("relations are stated for u != 0")
    p = spec.exponent
    pm, pp = p.bounds(u.grid)
    g, pg, _ = _grad_parts(u, p)
    pm_x = min(pm, float(pg.min()))
    pp_x = max(pp, float(pg.max()))
    norm = luxemburg_norm(u, spec)
    rho = modular_lp(u, spec)
    nx = modular_norm_X(u, p, spec.k)
    rx = modular_X(u, p, spec.k)
    regime_x = "above" if nx > 1 else "below"
    checks = (
        _trichotomy("lp_trichotomy", norm, rho, eq_tol),
        _power_bounds("lp_norm_above_one", norm, rho, pm, pp, "above", rtol),
        _power_bounds("lp_norm_below_one", norm, rho, pm, pp, "below", rtol),
        _trichotomy("X_trichotomy", nx, rx, eq_tol),
        _power_bounds("X_power_bounds", nx, rx, pm_x, pp_x, regime_x, rtol),
    )
    return RelationReport(norm, rho, nx, rx, pm, pp, checks)
