"""Energy, mass constraint and Gagliardo-Nirenberg ratio on a grid.

    E(u) = int |grad u|^p / p + int |x|^k |u|^p / p - int |u|^q / q
    mass(u) = int |u|^p / p

All gradients returned here are exact derivatives of the *discrete*
functionals (divided by the nodal quadrature weight), so they agree with
finite differences of ``energy`` by construction.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .exponents import ExponentField
from .grid import ScalarField
from .modular import (
    ModularSpec,
    gradient_norm,
    luxemburg_norm,
    modular_X,
    norm_X,
)

DEFAULT_EPS = 1e-10


def smoothing_eps(p: ExponentField, grid, eps: float | None = None) -> float:
    """Regularisation of |grad u| used inside the p-power (0 when min p >= 2)."""
    pmin = min(p.bounds(grid)[0], float(p.on_samples(grid).min()))
    if pmin >= 2.0:
        return 0.0
    return DEFAULT_EPS if eps is None else float(eps)


def _abs_pow(v, e):
    a = np.abs(v)
    return np.where(a > 0, a, 0.0) ** e


def signed_pow(v, e):
    """|v|^(e-1) sign(v), i.e. |v|^(e-2) v extended by 0 at v = 0."""
    return np.sign(v) * _abs_pow(v, e - 1.0)


def _grad_magnitude(u: ScalarField, eps: float):
    samples = u.grid.gradient_samples
    comps = samples.components(u.values)
    sq = np.sum(comps * comps, axis=0)
    if eps:
        sq = sq + eps * eps
    return comps, np.sqrt(sq)


@dataclass(frozen=True)
class EnergyReport:
    grad_term: float
    confine_term: float
    nonlinear_term: float
    energy: float
    mass: float
    norm_X: float
    modular_X: float
    eps: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def grad_term(u: ScalarField, p: ExponentField, eps: float = 0.0) -> float:
    samples = u.grid.gradient_samples
    ps = p.on_samples(u.grid)
    _, mag = _grad_magnitude(u, eps)
    return float(np.dot(samples.weights / ps, _abs_pow(mag, ps)))


def confine_term(u: ScalarField, p: ExponentField, k: float) -> float:
    grid = u.grid
    pv = p.on_nodes(grid)
    return float(np.dot(grid.weights * grid.radius**k / pv, _abs_pow(u.values, pv)))


def nonlinear_term(u: ScalarField, q: ExponentField) -> float:
    grid = u.grid
    qv = q.on_nodes(grid)
    return float(np.dot(grid.weights / qv, _abs_pow(u.values, qv)))


def mass(u: ScalarField, p: ExponentField) -> float:
    grid = u.grid
    pv = p.on_nodes(grid)
    return float(np.dot(grid.weights / pv, _abs_pow(u.values, pv)))


def energy_value(u: ScalarField, p: ExponentField, q: ExponentField, k: float, eps: float | None = None) -> float:
    """E(u) alone, without the norms that :func:`energy` also reports."""
    e = smoothing_eps(p, u.grid, eps)
    return grad_term(u, p, e) + confine_term(u, p, k) - nonlinear_term(u, q)


def energy(u: ScalarField, p: ExponentField, q: ExponentField, k: float, eps: float | None = None) -> EnergyReport:
    e = smoothing_eps(p, u.grid, eps)
    g = grad_term(u, p, e)
    c = confine_term(u, p, k)
    nl = nonlinear_term(u, q)
    return EnergyReport(
        grad_term=g,
        confine_term=c,
        nonlinear_term=nl,
        energy=g + c - nl,
        mass=mass(u, p),
        norm_X=norm_X(u, p, k),
        modular_X=modular_X(u, p, k),
        eps=e,
    )


def energy_gradient_raw(u: ScalarField, p: ExponentField, q: ExponentField, k: float, eps: float | None = None) -> np.ndarray:
    """Partial derivatives dE/du_i of the discrete energy (not weight-divided)."""
    grid = u.grid
    e = smoothing_eps(p, grid, eps)
    samples = grid.gradient_samples
    ps = p.on_samples(grid)
    comps, mag = _grad_magnitude(u, e)
    # d/dg_c of |g|^p / p = |g|^(p-2) g_c
    factor = samples.weights * np.where(mag > 0, mag, 0.0) ** (ps - 2.0)
    if not e:
        factor = np.where(mag > 0, factor, np.where(ps == 2.0, samples.weights, 0.0))
    out = np.zeros(grid.size)
    for op, comp in zip(samples.ops, comps):
        out += op.T @ (factor * comp)
    pv = p.on_nodes(grid)
    qv = q.on_nodes(grid)
    out += grid.weights * grid.radius**k * signed_pow(u.values, pv)
    out -= grid.weights * signed_pow(u.values, qv)
    return out


def energy_gradient(u: ScalarField, p: ExponentField, q: ExponentField, k: float, eps: float | None = None) -> ScalarField:
    return u.grid.field(energy_gradient_raw(u, p, q, k, eps) / u.grid.weights)


def constraint_gradient(u: ScalarField, p: ExponentField) -> ScalarField:
    """Weight-divided gradient of the mass: |u|^(p-2) u."""
    return u.grid.field(signed_pow(u.values, p.on_nodes(u.grid)))


def rho_q(u: ScalarField, q: ExponentField) -> float:
    """int |u|^q(x)."""
    return float(np.dot(u.grid.weights, _abs_pow(u.values, q.on_nodes(u.grid))))


# ---------------------------------------------------------------- Gagliardo-Nirenberg


class GNError(ValueError):
    pass


@dataclass(frozen=True)
class GNReport:
    alpha: float
    lhs: float
    rhs_base: float
    ratio: float
    norm_p: float
    grad_norm_p: float
    alpha_convention: str = "N*(1/p+ - 1/q-)"

    def to_dict(self) -> dict:
        return asdict(self)


def gn_alpha(p: ExponentField, q: ExponentField, grid) -> float:
    _, pp = p.bounds(grid)
    qm, _ = q.bounds(grid)
    return grid.dim * (1.0 / pp - 1.0 / qm)


def gn_ratio(u: ScalarField, p: ExponentField, q: ExponentField) -> GNReport:
    """||u||_q / (||u||_p^(1-alpha) ||grad u||_p^alpha) with a scalar alpha."""
    if u.is_zero():
        raise GNError("Gagliardo-Nirenberg ratio undefined for u = 0")
    grad = gradient_norm(u, p)
    if grad == 0:
        raise GNError("Gagliardo-Nirenberg ratio undefined for zero gradient")
    alpha = gn_alpha(p, q, u.grid)
    lhs = luxemburg_norm(u, ModularSpec(q, 0.0))
    base = luxemburg_norm(u, ModularSpec(p, 0.0))
    rhs = base ** (1.0 - alpha) * grad**alpha
    return GNReport(alpha, lhs, rhs, lhs / rhs, base, grad)
