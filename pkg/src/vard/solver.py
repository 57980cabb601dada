"""Constrained minimisation of E over S(c) within the ball B_sigma.

Projected gradient descent: a descent direction tangent to the mass
constraint, a step, then a retraction back onto S(c) by amplitude scaling.
Steps are chosen by Armijo backtracking on E; steps that leave B_sigma are
rejected and halved.  By default the direction is the Sobolev gradient
(preconditioned by the p = 2 stiffness plus weighted mass matrix), which
makes the iteration count essentially independent of the grid spacing.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import diags
from scipy.sparse.linalg import factorized

from .exponents import ExponentField
from .functional import constraint_gradient, energy_gradient_raw, energy_value, mass, smoothing_eps
from .grid import Grid, ScalarField
from .modular import norm_X
from .thresholds import mass_scale_root, trial_function

log = logging.getLogger(__name__)

ROUNDOFF = 1e-14


class NumericError(ArithmeticError):
    """Divergent or non-finite iteration."""

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace or []


@dataclass(frozen=True)
class Problem:
    grid: Grid
    p: ExponentField
    q: ExponentField
    k: float
    eps: float | None = None

    @property
    def smoothing(self) -> float:
        return smoothing_eps(self.p, self.grid, self.eps)


@dataclass
class SolveConfig:
    c: float
    sigma: float = 1.0
    max_iters: int = 2000
    step0: float = 1.0
    armijo_beta: float = 1e-4
    armijo_tau: float = 0.5
    tol_kkt: float = 1e-6
    init: object = "trial"
    metric: str = "sobolev"
    min_step: float = 1e-14

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("mass level c must be positive")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.armijo_tau < 1:
            raise ValueError("armijo_tau must lie in (0, 1)")
        if self.metric not in ("sobolev", "l2"):
            raise ValueError(f"unknown metric {self.metric!r}")


@dataclass
class SolveResult:
    u_c: ScalarField
    lambda_c: float
    gamma_c: float
    kkt_residual: float
    iterations: int
    converged: bool
    on_ball_boundary: bool
    ball_rejections: int
    norm_X: float
    mass_error: float
    trace: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "lambda_c": self.lambda_c,
            "gamma_c": self.gamma_c,
            "kkt_residual": self.kkt_residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "on_ball_boundary": self.on_ball_boundary,
            "ball_rejections": self.ball_rejections,
            "norm_X": self.norm_X,
            "mass_error": self.mass_error,
        }


def project_to_mass(u: ScalarField, c: float, p: ExponentField) -> ScalarField:
    return u * mass_scale_root(u, c, p)


def _inner(grid, a, b):
    return float(np.dot(grid.weights, a * b))


def recover_multiplier(u: ScalarField, p, q, k, eps=None) -> tuple[float, ScalarField]:
    """Least-squares multiplier of grad E = lambda * g and the stationarity residual."""
    grid = u.grid
    gE = energy_gradient_raw(u, p, q, k, eps) / grid.weights
    g = constraint_gradient(u, p).values
    gg = _inner(grid, g, g)
    if gg == 0:
        raise ValueError("constraint gradient vanishes; multiplier undefined")
    lam = _inner(grid, gE, g) / gg
    return lam, grid.field(gE - lam * g)


def kkt_residual(u: ScalarField, lam: float, p, q, k, eps=None) -> float:
    """||grad E - lambda g|| / ||grad E|| in the quadrature norm."""
    grid = u.grid
    gE = energy_gradient_raw(u, p, q, k, eps) / grid.weights
    g = constraint_gradient(u, p).values
    r = gE - lam * g
    nE = math.sqrt(_inner(grid, gE, gE))
    nr = math.sqrt(_inner(grid, r, r))
    if nE == 0:
        return 0.0 if nr == 0 else math.inf
    return nr / nE


def preconditioner(problem: Problem):
    """Solver for (K + W (1 + |x|^k)) d = rhs, with K the p = 2 stiffness."""
    grid = problem.grid
    K = grid.gradient_samples.stiffness()
    M = diags(grid.weights * (1.0 + grid.radius**problem.k))
    return factorized((K + M).tocsc())


def minimize(problem: Problem, cfg: SolveConfig) -> SolveResult:
    grid, p, q, k = problem.grid, problem.p, problem.q, problem.k
    eps = problem.smoothing
    c = cfg.c
    if isinstance(cfg.init, ScalarField):
        u = project_to_mass(cfg.init, c, p)
    else:
        _, u = trial_function(c, p, grid)
    E = energy_value(u, p, q, k, eps)
    nx = norm_X(u, p, k)
    if nx > cfg.sigma:
        warnings.warn(f"initial field has ||u||_X = {nx:.4g} > sigma = {cfg.sigma}", stacklevel=2)
    solve = preconditioner(problem) if cfg.metric == "sobolev" else None
    W = grid.weights

    trace = [{"iter": 0, "energy": E, "mass_error": abs(mass(u, p) - c), "step": 0.0,
              "kkt": math.nan, "norm_X": nx}]
    step = cfg.step0
    rejections = 0
    converged = False
    lam = math.nan
    kkt = math.inf
    it = 0
    for it in range(1, cfg.max_iters + 1):
        raw = energy_gradient_raw(u, p, q, k, eps)
        graw = W * constraint_gradient(u, p).values
        gE = raw / W
        g = graw / W
        lam = float(np.dot(raw, g) / np.dot(graw, g))
        kkt = kkt_residual(u, lam, p, q, k, eps)
        trace[-1]["kkt"] = kkt
        if not math.isfinite(E) or not math.isfinite(kkt):
            raise NumericError("non-finite energy or gradient", trace)
        if kkt <= cfg.tol_kkt:
            converged = True
            it -= 1
            break
        # slope = <r, P^-1 r> with r the tangential residual; written this way
        # it stays positive without cancellation near convergence
        if solve is not None:
            mu = float(np.dot(graw, solve(raw)) / np.dot(graw, solve(graw)))
            r = raw - mu * graw
            d = solve(r)
            slope = float(np.dot(r, d))
        else:
            d = gE - lam * g
            slope = float(np.dot(W, d * d))
        if slope <= 0:
            log.debug("non-descent direction at iteration %d", it)
            break
        s = step
        while True:
            trial = u.values - s * d
            v = grid.field(trial)
            if v.is_zero():
                s *= cfg.armijo_tau
                continue
            v = project_to_mass(v, c, p)
            nv = norm_X(v, p, k)
            if nv > cfg.sigma:
                rejections += 1
                s *= 0.5
            else:
                Ev = energy_value(v, p, q, k, eps)
                if not math.isfinite(Ev):
                    raise NumericError("non-finite energy during line search", trace)
                # round-off slack: near convergence decreases drop below ulp(E)
                if Ev <= E - cfg.armijo_beta * s * slope + ROUNDOFF * max(1.0, abs(E)):
                    break
                s *= cfg.armijo_tau
            if s < cfg.min_step:
                v = None
                break
        if v is None:
            log.debug("line search stalled at iteration %d", it)
            break
        u, E, nx = v, Ev, nv
        trace.append({"iter": it, "energy": E, "mass_error": abs(mass(u, p) - c), "step": s,
                      "kkt": math.nan, "norm_X": nx})
        # allow the step to grow back after backtracking
        step = min(2.0 * s, cfg.step0) if cfg.step0 > 0 else 0.0
    else:
        lam, _ = recover_multiplier(u, p, q, k, eps)
        kkt = kkt_residual(u, lam, p, q, k, eps)
        trace[-1]["kkt"] = kkt
        converged = kkt <= cfg.tol_kkt
    if math.isnan(trace[-1]["kkt"]):
        lam, _ = recover_multiplier(u, p, q, k, eps)
        kkt = kkt_residual(u, lam, p, q, k, eps)
        trace[-1]["kkt"] = kkt
    return SolveResult(
        u_c=u,
        lambda_c=lam,
        gamma_c=E,
        kkt_residual=kkt,
        iterations=len(trace) - 1,
        converged=converged,
        on_ball_boundary=bool(nx >= cfg.sigma * (1 - 1e-9)),
        ball_rejections=rejections,
        norm_X=nx,
        mass_error=abs(mass(u, p) - c),
        trace=trace,
    )
