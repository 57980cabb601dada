"""Variable exponent fields p(x), q(x) and their admissibility checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import Grid

KINDS = ("constant", "radial", "class_P", "custom")

# quintic smoothstep S(t) = 6t^5 - 15t^4 + 10t^3 has max |S'| = 30/16
CUTOFF_SLOPE = 1.875


class ExponentError(ValueError):
    """Exponent outside its admissible range."""


@dataclass(frozen=True, eq=False)
class ExponentField:
    """A variable exponent with access to its radial drift x . grad p(x).

    ``lower``/``upper`` are analytic range bounds when known (``None``
    otherwise); the bounds that enter formulas are always grid extrema, see
    :meth:`bounds`.
    """

    func: Callable[[np.ndarray], np.ndarray]
    drift: Callable[[np.ndarray], np.ndarray]
    lipschitz_bound: float
    kind: str
    params: dict = field(default_factory=dict)
    lower: float | None = None
    upper: float | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def evaluate(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.broadcast_to(self.func(pts), (len(pts),)).astype(float)

    __call__ = evaluate

    def radial_drift(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.broadcast_to(self.drift(pts), (len(pts),)).astype(float)

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def on_nodes(self, grid: Grid) -> np.ndarray:
        return self._sampled(grid, "nodes", grid.points, self.evaluate)

    def drift_on_nodes(self, grid: Grid) -> np.ndarray:
        return self._sampled(grid, "dnodes", grid.points, self.radial_drift)

    def on_samples(self, grid: Grid) -> np.ndarray:
        pts = grid.gradient_samples.points
        return self._sampled(grid, "samples", pts, self.evaluate)

    def drift_on_samples(self, grid: Grid) -> np.ndarray:
        pts = grid.gradient_samples.points
        return self._sampled(grid, "dsamples", pts, self.radial_drift)

    def bounds(self, grid: Grid) -> tuple[float, float]:
        vals = self.on_nodes(grid)
        return float(vals.min()), float(vals.max())

    def _sampled(self, grid, tag, pts, fn):
        key = (grid.key, tag)
        if key not in self._cache:
            vals = np.array(fn(pts), dtype=float)
            if not np.all(np.isfinite(vals)):
                raise ExponentError(f"non-finite {self.kind} exponent values on grid")
            vals.setflags(write=False)
            self._cache[key] = vals
        return self._cache[key]

    def describe(self) -> dict:
        return {"kind": self.kind, **self.params}


def _check_range(lo, hi, dim=None):
    if lo is not None and not lo > 1:
        raise ExponentError(f"exponent must exceed 1 everywhere (got inf = {lo})")
    if dim is not None and hi is not None and not hi < dim:
        raise ExponentError(f"exponent must stay below N = {dim} (got sup = {hi})")


def make_constant_exponent(p0: float, dim: int | None = None) -> ExponentField:
    """Constant exponent; ``dim`` enforces the upper bound p0 < N when given."""
    p0 = float(p0)
    if not np.isfinite(p0):
        raise ExponentError("exponent must be finite")
    _check_range(p0, p0, dim)
    return ExponentField(
        func=lambda x: np.full(len(x), p0),
        drift=lambda x: np.zeros(len(x)),
        lipschitz_bound=0.0,
        kind="constant",
        params={"p0": p0},
        lower=p0,
        upper=p0,
    )


def make_radial_exponent(
    profile: Callable[[np.ndarray], np.ndarray],
    dprofile: Callable[[np.ndarray], np.ndarray],
    lipschitz: float,
    lower: float | None = None,
    upper: float | None = None,
    params: dict | None = None,
    dim: int | None = None,
    kind: str = "radial",
) -> ExponentField:
    """Exponent p(x) = P(|x|); the drift is |x| P'(|x|)."""
    _check_range(lower, upper, dim)

    def func(x):
        return profile(np.sqrt(np.sum(x * x, axis=1)))

    def drift(x):
        r = np.sqrt(np.sum(x * x, axis=1))
        return r * dprofile(r)

    return ExponentField(func, drift, float(lipschitz), kind, dict(params or {}), lower, upper)


def make_custom_exponent(
    func: Callable[[np.ndarray], np.ndarray],
    grad: Callable[[np.ndarray], np.ndarray],
    lipschitz: float,
    params: dict | None = None,
) -> ExponentField:
    """Arbitrary exponent from ``func(points)`` and ``grad(points) -> (M, N)``."""

    def drift(x):
        return np.sum(x * grad(x), axis=1)

    return ExponentField(func, drift, float(lipschitz), "custom", dict(params or {}))


def gaussian_exponent(p_min: float, p_max: float, width: float = 1.0, dim=None) -> ExponentField:
    """p(x) = p_min + (p_max - p_min) exp(-|x|^2 / width^2), range (p_min, p_max]."""
    amp = p_max - p_min
    if amp < 0:
        raise ExponentError("need p_max >= p_min")

    def prof(r):
        return p_min + amp * np.exp(-((r / width) ** 2))

    def dprof(r):
        return -2.0 * amp * r / width**2 * np.exp(-((r / width) ** 2))

    lip = amp * np.sqrt(2.0) * np.exp(-0.5) / width
    return make_radial_exponent(
        prof, dprof, lip, p_min, p_max,
        {"profile": "gaussian", "p_min": p_min, "p_max": p_max, "width": width},
        dim,
    )


# ---------------------------------------------------------------- cutoff


def smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)


def smoothstep_deriv(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    return np.where(inside, 30.0 * t * t * (1.0 - t) ** 2, 0.0)


def cutoff(r, r0):
    """eta(r): 0 on [0, r0], 1 on [2 r0, inf), C^2 in between."""
    return smoothstep((np.asarray(r, dtype=float) - r0) / r0)


def cutoff_deriv(r, r0):
    return smoothstep_deriv((np.asarray(r, dtype=float) - r0) / r0) / r0


# ---------------------------------------------------------------- inner profiles
# Each returns (P(r), P'(r)) callables depending on r0; all have P' = 0 for r >= 2 r0.


def _profile_constant(p0, r0, value=None):
    v = p0 if value is None else float(value)
    return (lambda r: np.full_like(r, v), lambda r: np.zeros_like(r), 0.0, (v, v))


def _profile_radial_bump(p0, r0, amp=0.3):
    # P = p0 + amp (1 - t^2)^3, t = r / (2 r0)
    s = 2.0 * r0

    def P(r):
        t = np.clip(r / s, 0.0, 1.0)
        return p0 + amp * (1.0 - t * t) ** 3

    def dP(r):
        t = r / s
        return np.where(t < 1.0, -6.0 * amp * t * (1.0 - t * t) ** 2 / s, 0.0)

    # max |6 t (1-t^2)^2| on [0,1] at t = 1/sqrt(5)
    lip = abs(amp) * 6.0 * (1 / np.sqrt(5)) * (4 / 5) ** 2 / s
    lo, hi = sorted((p0, p0 + amp))
    return P, dP, lip, (lo, hi)


def _profile_plateau(p0, r0, slope=1.0):
    # P = p0 + slope * psi(r), psi' = 1 - S(r / 2r0): linear ramp, then flat at r0
    s = 2.0 * r0

    def psi(r):
        t = np.clip(r / s, 0.0, 1.0)
        return np.where(r < s, r - s * (t**6 - 3 * t**5 + 2.5 * t**4), 0.5 * s)

    def P(r):
        return p0 + slope * psi(r)

    def dP(r):
        return slope * (1.0 - smoothstep(r / s))

    lo, hi = sorted((p0, p0 + slope * r0))
    return P, dP, abs(slope), (lo, hi)


INNER_PROFILES = {
    "constant": _profile_constant,
    "radial-bump": _profile_radial_bump,
    "plateau": _profile_plateau,
}


def make_inner_profile(name: str, p0: float, r0: float, dim=None, **kw) -> ExponentField:
    """Registry lookup for inner exponents with zero drift beyond 2 r0."""
    try:
        builder = INNER_PROFILES[name]
    except KeyError:
        raise ExponentError(
            f"unknown inner profile {name!r}; choose from {sorted(INNER_PROFILES)}"
        ) from None
    P, dP, lip, (lo, hi) = builder(float(p0), float(r0), **kw)
    return make_radial_exponent(P, dP, lip, lo, hi, {"profile": name, "r0": r0, **kw}, dim)


def make_class_P_exponent(p0: float, inner: ExponentField, r0: float, dim=None) -> ExponentField:
    """Blend p~ = (1 - eta(|x|)) p0 + eta(|x|) inner(x) with the quintic cutoff.

    The drift is |x| eta'(|x|) (inner - p0) + eta(|x|) (x . grad inner); it
    vanishes for |x| <= r0 and, because inner has zero drift there, for
    |x| >= 2 r0.
    """
    p0 = float(p0)
    if not r0 > 0:
        raise ExponentError("r0 must be positive")
    lo = None if inner.lower is None else min(p0, inner.lower)
    hi = None if inner.upper is None else max(p0, inner.upper)
    _check_range(lo if lo is not None else p0, hi, dim)

    def func(x):
        r = np.sqrt(np.sum(x * x, axis=1))
        eta = cutoff(r, r0)
        return (1.0 - eta) * p0 + eta * inner.evaluate(x)

    def drift(x):
        r = np.sqrt(np.sum(x * x, axis=1))
        eta = cutoff(r, r0)
        return r * cutoff_deriv(r, r0) * (inner.evaluate(x) - p0) + eta * inner.radial_drift(x)

    spread = 0.0
    if inner.lower is not None and inner.upper is not None:
        spread = max(abs(inner.upper - p0), abs(inner.lower - p0))
    lip = inner.lipschitz_bound + CUTOFF_SLOPE * spread / r0
    params = {"p0": p0, "r0": float(r0), "inner": inner.describe(),
              "cutoff_C": CUTOFF_SLOPE,
              "drift_bound": 2.0 * CUTOFF_SLOPE * spread + 2.0 * r0 * inner.lipschitz_bound}
    return ExponentField(func, drift, lip, "class_P", params, lo, hi)


# ---------------------------------------------------------------- admissibility


@dataclass(frozen=True)
class AdmissibilityReport:
    dim: int
    k: float
    p_minus: float
    p_plus: float
    q_minus: float
    q_plus: float
    sobolev_gap: float
    cond_pH: bool
    cond_qH: bool
    cond_q1: bool
    cond_q2: bool
    k_positive: bool
    threshold_q1: float
    threshold_q2: float

    @property
    def thresholds(self) -> tuple[float, float]:
        return (self.threshold_q1, self.threshold_q2)

    @property
    def surrogate(self) -> bool:
        """True when p+ >= N: the dimension is below the (p_H) range."""
        return not self.p_plus < self.dim

    def violations(self, require_q2: bool = False) -> list[str]:
        """Names of the conditions a solve configuration must not violate.

        Below the (p_H) dimension range (p+ >= N) the q-thresholds are
        reported but not enforced.
        """
        bad = []
        if not self.p_minus > 1:
            bad.append("(p_H)")
        if not self.k_positive:
            bad.append("k>0")
        if not self.cond_qH:
            bad.append("(q_H)")
        if not self.surrogate:
            if not self.cond_q1:
                bad.append("cond_q1")
            if require_q2 and not self.cond_q2:
                bad.append("cond_q2")
        return bad

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["surrogate"] = self.surrogate
        return d


def sobolev_conjugate(p: np.ndarray, dim: int) -> np.ndarray:
    """p* = N p / (N - p), +inf where p >= N."""
    p = np.asarray(p, dtype=float)
    out = np.full_like(p, np.inf)
    sub = p < dim
    out[sub] = dim * p[sub] / (dim - p[sub])
    return out


def check_admissibility(p: ExponentField, q: ExponentField, dim: int, k: float, grid: Grid) -> AdmissibilityReport:
    if grid.size == 0:
        raise ValueError("empty grid")
    pv = p.on_nodes(grid)
    qv = q.on_nodes(grid)
    pm, pp = float(pv.min()), float(pv.max())
    qm, qp = float(qv.min()), float(qv.max())
    gap = float(np.min(sobolev_conjugate(pv, dim) - qv))
    t1 = pp + pp * pp / dim
    t2 = 2 * pp - pm + pp * pm / dim
    cond_pH = bool(pm > 1 and pp < dim)
    cond_qH = bool(np.all(qv > pv) and gap > 0)
    return AdmissibilityReport(
        dim=dim, k=float(k),
        p_minus=pm, p_plus=pp, q_minus=qm, q_plus=qp,
        sobolev_gap=gap,
        cond_pH=cond_pH,
        cond_qH=cond_qH,
        cond_q1=bool(qm > t1 and gap > 0),
        cond_q2=bool(qm > t2 and gap > 0),
        k_positive=bool(k > 0),
        threshold_q1=t1,
        threshold_q2=t2,
    )
