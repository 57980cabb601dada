"""Term-by-term evaluation of the variable exponent Pohozaev identity.

For a weak solution u with multiplier lambda,

    int (N-p)/p |grad u|^p + int (N+k)/p |x|^k |u|^p - N lambda int |u|^p / p
        = int (ln|u| - 1/q) |u|^q (x.grad q)/q + N int |u|^q / q
          - int [(ln|grad u| - 1/p) |grad u|^p + (ln|u| - 1/p) |u|^p |x|^k] (x.grad p)/p
          + lambda int (ln|u| - 1/p) |u|^p (x.grad p)/p.

The log-weighted pieces form the remainder R = lambda R1 + R2 - R4 - R3
(R1: mass, R2: q-term, R3: confinement, R4: gradient), so the right-hand
side is N int |u|^q / q + R.  Products t^p ln t are set to zero where
t < ``clamp``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .functional import smoothing_eps
from .grid import ScalarField, gradient
from .exponents import ExponentField

CLAMP = 1e-14


def _pow_log(t, e, clamp):
    """(t^e, t^e ln t) with both set to 0 where t < clamp."""
    keep = t >= clamp
    safe = np.where(keep, t, 1.0)
    pw = np.where(keep, safe**e, 0.0)
    return pw, np.where(keep, pw * np.log(safe), 0.0)


@dataclass(frozen=True)
class PohozaevReport:
    lhs_grad: float
    lhs_confine: float
    lhs_mass: float
    rhs_q_log: float
    rhs_q_vol: float
    rhs_p_log_grad: float
    rhs_p_log_confine: float
    rhs_p_log_mass: float
    lhs: float
    rhs: float
    residual: float
    relative_residual: float
    R: float
    R1: float
    R2: float
    R3: float
    R4: float
    weak_residual: float
    weak_relative_residual: float
    lam: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def pohozaev_terms(u: ScalarField, lam: float, p: ExponentField, q: ExponentField, k: float,
                   clamp: float = CLAMP, eps: float | None = None) -> PohozaevReport:
    grid = u.grid
    N = grid.dim
    w = grid.weights
    xk = grid.radius**k
    a = np.abs(u.values)
    pv, qv = p.on_nodes(grid), q.on_nodes(grid)
    dp, dq = p.drift_on_nodes(grid), q.drift_on_nodes(grid)

    samples = grid.gradient_samples
    ps = p.on_samples(grid)
    dps = p.drift_on_samples(grid)
    e = smoothing_eps(p, grid, eps)
    comps = samples.components(u.values)
    gmag = np.sqrt(np.sum(comps * comps, axis=0) + e * e)
    gp, gplog = _pow_log(gmag, ps, clamp)
    up, uplog = _pow_log(a, pv, clamp)
    uq, uqlog = _pow_log(a, qv, clamp)

    A = float(np.dot(samples.weights, gp))             # int |grad u|^p
    lhs_grad = float(np.dot(samples.weights, (N - ps) / ps * gp))
    lhs_confine = float(np.dot(w, (N + k) / pv * xk * up))
    lhs_mass = N * lam * float(np.dot(w, up / pv))
    rhs_q_vol = N * float(np.dot(w, uq / qv))

    # (ln t - 1/e) t^e (x.grad e)/e
    R1 = float(np.dot(w, (uplog - up / pv) * dp / pv))
    R2 = float(np.dot(w, (uqlog - uq / qv) * dq / qv))
    R3 = float(np.dot(w, (uplog - up / pv) * xk * dp / pv))
    R4 = float(np.dot(samples.weights, (gplog - gp / ps) * dps / ps))
    R = lam * R1 + R2 - R4 - R3

    lhs = lhs_grad + lhs_confine - lhs_mass
    rhs = R2 + rhs_q_vol - (R4 + R3) + lam * R1
    terms = [lhs_grad, lhs_confine, lhs_mass, rhs_q_vol, R2, R3, R4, lam * R1]
    scale = max(abs(t) for t in terms) or 1.0

    B = float(np.dot(w, xk * up))
    M = float(np.dot(w, up))
    Q = float(np.dot(w, uq))
    weak = A - (lam * M + Q - B)
    wscale = max(abs(A), abs(lam * M), abs(Q), abs(B)) or 1.0

    return PohozaevReport(
        lhs_grad=lhs_grad,
        lhs_confine=lhs_confine,
        lhs_mass=lhs_mass,
        rhs_q_log=R2,
        rhs_q_vol=rhs_q_vol,
        rhs_p_log_grad=R4,
        rhs_p_log_confine=R3,
        rhs_p_log_mass=lam * R1,
        lhs=lhs,
        rhs=rhs,
        residual=abs(lhs - rhs),
        relative_residual=abs(lhs - rhs) / scale,
        R=R, R1=R1, R2=R2, R3=R3, R4=R4,
        weak_residual=abs(weak),
        weak_relative_residual=abs(weak) / wscale,
        lam=lam,
    )


def remainder_R(u: ScalarField, lam: float, p: ExponentField, q: ExponentField, k: float,
                clamp: float = CLAMP) -> tuple[float, float, float, float, float]:
    rep = pohozaev_terms(u, lam, p, q, k, clamp)
    return rep.R, rep.R1, rep.R2, rep.R3, rep.R4


def positivity_bracket(p_minus: float, p_plus: float, q_minus: float, dim: int) -> float:
    """Coefficient of rho_X(u_c) in the lower bound for E(u_c)."""
    pm, pp, qm, N = p_minus, p_plus, q_minus, dim
    return (1.0 / pp
            - (N * (pp - pm) + pp * pm) / (N * pp * (qm - pm))
            - (pp - pm) / (pp * (qm - pm)))


def positivity_margin(energy: float, rho_X: float, R: float, p_minus, p_plus, q_minus, dim) -> dict:
    """E - [bracket * rho_X - |R| p- / (N (q- - p-))]."""
    b = positivity_bracket(p_minus, p_plus, q_minus, dim)
    lower = b * rho_X - abs(R) * p_minus / (dim * (q_minus - p_minus))
    return {"bracket": b, "lower_bound": lower, "energy": energy, "margin": energy - lower}


# ---------------------------------------------------------------- regularity


class RegularityError(ValueError):
    pass


@dataclass(frozen=True)
class RegularityReport:
    annuli: list
    sup_by_annulus: list
    separations: list
    max_gradient_jump: list
    holder_exponent: float | None
    holder_constant: float | None
    fit_r2: float | None
    degenerate: bool
    pairs: int

    def to_dict(self) -> dict:
        return asdict(self)


def regularity_diagnostics(u: ScalarField, n_annuli: int = 8, seps=(2, 4, 8, 16),
                           region: float = 0.5) -> RegularityReport:
    """Local sup-norms on annuli and a Holder exponent estimate for grad u.

    For each separation m in ``seps`` (grid steps, along each axis) the
    largest jump |grad u(x) - grad u(y)| over node pairs inside
    |x| <= region * L is recorded; a log-log fit of jump against distance
    gives the exponent.  Smooth gradients give an exponent near 1, a kink
    gives one near 0.  Separations start at 2 because central differences
    smear a kink over one cell.
    """
    grid = u.grid
    h = grid.h
    edges = np.linspace(0.0, grid.L, n_annuli + 1)
    r = grid.radius
    sups = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mask = (r >= lo) & (r < hi)
        sups.append(float(np.max(np.abs(u.values[mask]))) if np.any(mask) else 0.0)

    G = gradient(u)
    if grid.mode == "radial":
        arr = G.reshape(grid.n, 1)
        shape = (grid.n,)
    else:
        shape = grid.shape
        arr = G.reshape(shape + (grid.dim,))
    inside = (r <= region * grid.L).reshape(shape)

    jumps, pairs = [], 0
    for m in seps:
        best = 0.0
        for ax in range(len(shape)):
            lo = [slice(None)] * len(shape)
            hi = [slice(None)] * len(shape)
            lo[ax] = slice(None, -m)
            hi[ax] = slice(m, None)
            ok = inside[tuple(lo)] & inside[tuple(hi)]
            diff = arr[tuple(hi)] - arr[tuple(lo)]
            mag = np.sqrt(np.sum(diff * diff, axis=-1))[ok]
            pairs += int(ok.sum())
            if mag.size:
                best = max(best, float(mag.max()))
        jumps.append(best)
    if pairs < 32:
        raise RegularityError(f"only {pairs} usable node pairs (need 32)")
    dist = [m * h for m in seps]
    jumps_arr = np.array(jumps)
    if np.all(jumps_arr <= 1e-14 * max(1.0, float(np.max(np.abs(u.values))))):
        return RegularityReport(list(edges), sups, dist, jumps, None, None, None, True, pairs)
    x = np.log(dist)
    y = np.log(np.maximum(jumps_arr, 1e-300))
    slope, icpt = np.polyfit(x, y, 1)
    pred = slope * x + icpt
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return RegularityReport(list(edges), sups, dist, jumps, float(slope), float(math.exp(icpt)),
                            r2, False, pairs)
