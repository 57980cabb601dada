"""Trial function, mass-level roots and the explicit separation thresholds.

The trial profile is phi_c(x) = a exp(-pi |x|^2 / p+), with the amplitude a
solving the mass equation G(a) = c.  The threshold constants bound the
X-modular of phi_c by a^(p-) (c1 + c2) and lead to mass levels c1(sigma),
c2(sigma), c3(sigma), c4(sigma) and the working level c0.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from ._roots import increasing_root
from .exponents import ExponentField
from .functional import gn_alpha, gn_ratio, mass
from .grid import Grid, ScalarField, sphere_area
from .modular import modular_X, norm_X

C0_SAFETY = 0.99


class ThresholdError(ValueError):
    """Degenerate threshold configuration (non-positive bracket)."""


def _mass_coeffs(values, p: ExponentField, grid: Grid):
    pv = p.on_nodes(grid)
    a = np.abs(values)
    keep = a > 0
    return grid.weights[keep] / pv[keep] * a[keep] ** pv[keep], pv[keep]


def mass_scale_root(u: ScalarField, c: float, p: ExponentField, rtol: float = 1e-14) -> float:
    """The unique t > 0 with mass(t u) = c."""
    if not c > 0:
        raise ValueError("mass level c must be positive")
    if u.is_zero():
        raise ValueError("cannot rescale the zero field to positive mass")
    coef, pv = _mass_coeffs(u.values, p, u.grid)
    m1 = float(coef.sum())
    if p.is_constant:
        return (c / m1) ** (1.0 / pv[0])
    pm, pp = float(pv.min()), float(pv.max())
    t0 = (c / m1) ** (1.0 / pp) if c > m1 else (c / m1) ** (1.0 / pm)
    return increasing_root(lambda t: float(np.dot(coef, t**pv)), c, x0=t0, rtol=rtol)


def trial_profile(grid: Grid, p: ExponentField) -> ScalarField:
    """exp(-pi |x|^2 / p+)."""
    _, pp = p.bounds(grid)
    return grid.field(np.exp(-math.pi * grid.radius**2 / pp))


def trial_function(c: float, p: ExponentField, grid: Grid) -> tuple[float, ScalarField]:
    """Amplitude a(c) solving G(a) = c, and the sampled phi_c = a * profile."""
    if not c > 0:
        raise ValueError("mass level c must be positive")
    base = trial_profile(grid, p)
    a = mass_scale_root(base, c, p)
    return a, base * a


def G(a: float, p: ExponentField, grid: Grid) -> float:
    """int a^p(x) / p(x) exp(-pi p(x) |x|^2 / p+) dx on the grid."""
    return mass(trial_profile(grid, p) * a, p)


# ---------------------------------------------------------------- constants


@dataclass(frozen=True)
class GaussianConstants:
    const_c1: float            # nominal closed form for the gradient bound
    const_c2: float            # same closed form, confinement bound
    moment_direct: float       # (2pi/p+)^p+ int |x|^p+ exp(-pi p- |x|^2/p+), by quadrature
    moment_closed: float       # exact closed form of the same integral
    c1_rigorous: float         # int max(t^p-, t^p+) e^{...}, t = 2 pi |x| / p+
    c2_rigorous: float         # int |x|^k e^{-pi p- |x|^2 / p+}
    c1_used: float
    c2_used: float
    sign_factor: float         # nominal closed form / exact moment

    def to_dict(self) -> dict:
        return asdict(self)


def _radial_quad(f, dim):
    """int_{R^N} f(|x|) dx = omega_N int_0^inf f(r) r^(N-1) dr."""
    val, _ = quad(lambda r: f(r) * r ** (dim - 1), 0.0, np.inf, epsabs=0, epsrel=1e-13, limit=200)
    return sphere_area(dim) * val


def gaussian_bound_constants(p_minus: float, p_plus: float, dim: int, k: float | None = None) -> GaussianConstants:
    pm, pp = float(p_minus), float(p_plus)
    omega = sphere_area(dim)
    s = (dim + pp) / 2.0
    pref = (2.0 * math.pi / pp) ** pp
    nominal = pref * omega * math.pi ** (-s) * (pp / pm) ** (-s) * float(gamma_fn(s))
    beta = math.pi * pm / pp
    moment = _radial_quad(lambda r: r**pp * math.exp(-beta * r * r), dim)
    closed = pref * 0.5 * omega * float(gamma_fn(s)) * beta ** (-s)
    tscale = 2.0 * math.pi / pp
    c1r = _radial_quad(
        lambda r: max((tscale * r) ** pm, (tscale * r) ** pp) * math.exp(-beta * r * r), dim
    )
    kk = pp if k is None else float(k)
    c2r = _radial_quad(lambda r: r**kk * math.exp(-beta * r * r), dim)
    return GaussianConstants(
        const_c1=nominal,
        const_c2=nominal,
        moment_direct=pref * moment,
        moment_closed=closed,
        c1_rigorous=c1r,
        c2_rigorous=c2r,
        c1_used=max(nominal, c1r),
        c2_used=max(nominal, c2r),
        sign_factor=nominal / closed,
    )


def constants_for(p: ExponentField, grid: Grid, k: float | None = None) -> GaussianConstants:
    pm, pp = p.bounds(grid)
    return gaussian_bound_constants(pm, pp, grid.dim, k)


def _c1_formula(radius, pm, pp, csum):
    return min(
        1.0 / pp,
        (radius**pp / csum) ** (pp / pm) / pp,
        (radius**pm / csum) ** (pp / pm) / pp,
    )


def threshold_c1(sigma: float, p_minus: float, p_plus: float, consts: GaussianConstants) -> float:
    """Largest mass level for which the trial function is known to lie in B_sigma."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return _c1_formula(sigma, p_minus, p_plus, consts.c1_used + consts.c2_used)


def choose_a1_a2(sigma: float, p_minus: float, p_plus: float) -> tuple[float, float]:
    """Radii fractions 0 < a1 < a2 < 1 with both separation brackets positive.

    a1 is half its admissible bound, a2 the midpoint of its admissible
    interval.  Besides the bracket (a2 s)^p-/p+ - (a1 s)^p+/p- > 0 the lower
    end of the a2 interval also enforces (a2 s)^p+/p+ - (a1 s)^p-/p- > 0.
    """
    pm, pp = float(p_minus), float(p_plus)
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    a1 = 0.5 * min(1.0, (pm / (pp * sigma ** (pp - pm))) ** (1.0 / pp))
    for _ in range(200):
        lower = max(
            a1,
            (pp / pm * sigma ** (pp - pm) * a1**pp) ** (1.0 / pm),
            (pp / pm * (a1 * sigma) ** pm) ** (1.0 / pp) / sigma,
        )
        if lower < 1.0:
            return a1, 0.5 * (lower + 1.0)
        a1 *= 0.5
    raise ThresholdError("could not place a1 < a2 < 1")


def brackets(sigma, a1, a2, pm, pp) -> tuple[float, float]:
    b3 = (a2 * sigma) ** pm / pp - (a1 * sigma) ** pp / pm
    b4 = (a2 * sigma) ** pp / pp - (a1 * sigma) ** pm / pm
    return b3, b4


@dataclass(frozen=True)
class ThresholdReport:
    sigma: float
    const_c1: float
    const_c2: float
    c1_used: float
    c2_used: float
    c1_sigma: float
    c2_sigma: float
    c3_sigma: float
    c4_sigma: float
    c0: float
    a1: float
    a2: float
    alpha_used: float
    K_alpha: float
    K_prime: float
    K_double_prime: float
    bracket_c3: float
    bracket_c4: float
    constants: dict

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def threshold_c0(sigma: float, p: ExponentField, q: ExponentField, grid: Grid, K_alpha_est: float,
                 k: float | None = None, radii: tuple[float, float] | None = None) -> ThresholdReport:
    """All four mass levels and c0; ``radii`` overrides the (a1, a2) choice."""
    if not K_alpha_est > 0:
        raise ValueError("K_alpha estimate must be positive")
    pm, pp = p.bounds(grid)
    qm, qp = q.bounds(grid)
    consts = constants_for(p, grid, k)
    csum = consts.c1_used + consts.c2_used
    alpha = gn_alpha(p, q, grid)
    if not 0 < alpha < 1:
        raise ThresholdError(f"interpolation exponent alpha={alpha} outside (0, 1)")
    a1, a2 = choose_a1_a2(sigma, pm, pp) if radii is None else radii
    b3, b4 = brackets(sigma, a1, a2, pm, pp)
    if b3 <= 0 or b4 <= 0:
        raise ThresholdError(f"non-positive separation bracket (c3: {b3}, c4: {b4})")
    Kp = max(K_alpha_est**qp, K_alpha_est**qm)
    Kpp = K_alpha_est**qm
    expo = pp / (qm * (1.0 - alpha))
    c1s = _c1_formula(sigma, pm, pp, csum)
    c2s = _c1_formula(a1 * sigma, pm, pp, csum)
    c3s = (qm / (Kp * sigma ** (alpha * qp)) * b3) ** expo / pp
    c4s = (qm / (Kpp * sigma ** (alpha * qm)) * b4) ** expo / pp
    c0 = C0_SAFETY * min(c2s, c3s, c4s)
    return ThresholdReport(
        sigma=sigma,
        const_c1=consts.const_c1, const_c2=consts.const_c2,
        c1_used=consts.c1_used, c2_used=consts.c2_used,
        c1_sigma=c1s, c2_sigma=c2s, c3_sigma=c3s, c4_sigma=c4s, c0=c0,
        a1=a1, a2=a2, alpha_used=alpha,
        K_alpha=K_alpha_est, K_prime=Kp, K_double_prime=Kpp,
        bracket_c3=b3, bracket_c4=b4,
        constants=consts.to_dict(),
    )


# ---------------------------------------------------------------- empirical pieces


def gn_family(grid: Grid, size: int = 200, seed: int = 0):
    """Seeded Gaussian-mixture fields used to estimate the GN constant."""
    rng = np.random.default_rng(seed)
    pts = grid.points
    scale = 0.4 * grid.L
    for _ in range(size):
        vals = np.zeros(grid.size)
        for _ in range(int(rng.integers(1, 4))):
            centre = np.zeros(grid.dim)
            if grid.mode == "tensor":
                centre = rng.uniform(-0.3, 0.3, grid.dim) * scale
            width = rng.uniform(0.08, 0.35) * scale
            amp = rng.uniform(0.2, 2.0)
            d2 = np.sum((pts - centre) ** 2, axis=1)
            vals += amp * np.exp(-d2 / (2 * width**2))
        yield grid.field(vals)


def estimate_gn_constant(grid: Grid, p: ExponentField, q: ExponentField, size: int = 200, seed: int = 0) -> float:
    """Largest GN ratio over the fixed field family."""
    return max(gn_ratio(u, p, q).ratio for u in gn_family(grid, size, seed))


def decay_envelopes(c: float, p_minus: float, p_plus: float, consts: GaussianConstants) -> dict:
    """The two candidate decay envelopes for E(phi_c) (and hence for rho_X(u_c))."""
    csum = consts.c1_used + consts.c2_used
    nominal = (c * p_plus) ** p_minus * csum
    derived = (c * p_plus) ** (p_minus / p_plus) * csum
    return {"nominal": nominal, "derived": derived, "looser": max(nominal, derived)}


def trial_bound_check(c: float, p: ExponentField, grid: Grid, k: float) -> dict:
    """Compare rho_X(phi_c) with a^(p-) (c1 + c2); warn when the bound fails."""
    a, phi = trial_function(c, p, grid)
    pm, _ = p.bounds(grid)
    consts = constants_for(p, grid, k)
    rho = modular_X(phi, p, k)
    bound = a**pm * (consts.c1_used + consts.c2_used)
    ok = rho <= bound
    if not ok:
        warnings.warn(f"trial modular {rho:.6g} exceeds Gaussian bound {bound:.6g}", stacklevel=2)
    return {"a": a, "rho_X": rho, "bound": bound, "holds": ok, "norm_X": norm_X(phi, p, k)}


def separation_probe(c: float, sigma: float, p: ExponentField, q: ExponentField, grid: Grid, k: float,
                     a2: float, samples: int = 100, seed: int = 0) -> dict:
    """Compare E(phi_c) with energies of random S(c) fields whose X-norm lies in [a2 sigma, sigma].

    Fields are oscillating bumps rescaled onto S(c); those landing outside
    the annulus are counted and discarded.  The outcome is a log record, not
    an assertion.
    """
    from .functional import energy_value

    rng = np.random.default_rng(seed)
    _, phi = trial_function(c, p, grid)
    e_trial = energy_value(phi, p, q, k)
    energies = []
    misses = 0
    x = grid.points[:, 0]
    r = grid.radius
    for _ in range(samples):
        width = rng.uniform(0.05, 1.0)
        freq = rng.uniform(0.0, 40.0)
        v = np.exp(-(r / width) ** 2) * np.cos(freq * x + rng.uniform(0, np.pi))
        u = grid.field(v)
        if u.is_zero():
            misses += 1
            continue
        u = u * mass_scale_root(u, c, p)
        nx = norm_X(u, p, k)
        if not a2 * sigma <= nx <= sigma:
            misses += 1
            continue
        energies.append(energy_value(u, p, q, k))
    inf_probe = min(energies) if energies else math.inf
    return {
        "trial_energy": e_trial,
        "probe_count": len(energies),
        "probe_misses": misses,
        "probe_inf": inf_probe if energies else None,
        "separated": bool(e_trial < inf_probe),
    }
