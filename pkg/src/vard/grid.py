"""Truncated-domain grids, quadrature and discrete gradients.

Two layouts are supported:

* ``radial``: cell-centred radii ``r_i = (i + 1/2) h`` on ``(0, L]`` with
  weights ``omega_N r_i^(N-1) h`` (composite midpoint rule).  Fields are
  radial profiles ``U(r)``.
* ``tensor``: a uniform ``n^N`` lattice of cell centres on ``(-L, L)^N``
  (``N <= 2``) with weights ``h^N``.

Values outside the truncation region are zero (Dirichlet truncation).

Besides nodal quadrature every grid carries a set of *gradient samples*
used by the energy: forward and backward differences, each taken with half
weight, anchored on the nodes padded by one ring of exterior zeros.  For
``p = 2`` this reproduces the standard compact (3-point / 5-point)
Laplacian, and the exponent is evaluated at both ends of every difference,
which keeps variable-exponent integrals second order.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.special import gamma as gamma_fn

MODES = ("radial", "tensor")


class GridError(ValueError):
    """Unsupported grid configuration."""


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere S^(dim-1): 2 pi^(N/2) / Gamma(N/2)."""
    return 2.0 * math.pi ** (dim / 2) / float(gamma_fn(dim / 2))


@dataclass(frozen=True)
class GradientSamples:
    """Discrete gradient evaluated at quadrature samples.

    ``ops[c] @ u`` is component ``c`` of the gradient at every sample;
    samples sit at ``points`` (where exponents are evaluated) with positive
    ``weights``.
    """

    ops: tuple
    points: np.ndarray
    weights: np.ndarray

    def components(self, values: np.ndarray) -> np.ndarray:
        return np.stack([op @ values for op in self.ops])

    def magnitude(self, values: np.ndarray) -> np.ndarray:
        comps = self.components(values)
        return np.sqrt(np.sum(comps * comps, axis=0))

    def stiffness(self) -> sp.csc_matrix:
        """Matrix of the quadratic form sum_s w_s |D u|_s^2."""
        W = sp.diags(self.weights)
        K = sum(op.T @ W @ op for op in self.ops)
        return sp.csc_matrix(K)


@dataclass(frozen=True, eq=False)
class Grid:
    dim: int
    mode: str
    L: float
    n: int
    h: float
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def key(self) -> tuple:
        return (self.dim, self.mode, float(self.L), int(self.n))

    def __hash__(self) -> int:
        return hash(self.key)

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and self.key == other.key

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def omega(self) -> float:
        return sphere_area(self.dim)

    @property
    def shape(self) -> tuple:
        if self.mode == "radial":
            return (self.n,)
        return (self.n,) * self.dim

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(np.sum(self.points**2, axis=1))

    @property
    def coordinates(self) -> np.ndarray:
        """1-d node coordinate along the first axis (radius in radial mode)."""
        return self.points[:, 0]

    def field(self, values) -> "ScalarField":
        return ScalarField(self, np.asarray(values, dtype=float))

    def sample(self, func) -> "ScalarField":
        """Evaluate ``func(points) -> values`` at every node."""
        return self.field(func(self.points))

    def zeros(self) -> "ScalarField":
        return self.field(np.zeros(self.size))

    @cached_property
    def gradient_samples(self) -> GradientSamples:
        if self.mode == "radial":
            return _radial_samples(self)
        return _tensor_samples(self)


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.size,):
            raise ValueError(
                f"field has shape {self.values.shape}, grid has {self.grid.size} nodes"
            )

    def __add__(self, other):
        return self.grid.field(self.values + _vals(other))

    def __sub__(self, other):
        return self.grid.field(self.values - _vals(other))

    def __mul__(self, t):
        return self.grid.field(self.values * _vals(t))

    __rmul__ = __mul__

    def __truediv__(self, t):
        return self.grid.field(self.values / _vals(t))

    def __neg__(self):
        return self.grid.field(-self.values)

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def to_csv(self, path) -> None:
        """Write node coordinate(s) and value, one node per row."""
        cols = [f"x{i + 1}" for i in range(self.grid.points.shape[1])]
        if self.grid.mode == "radial":
            cols = ["r"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols + ["value"])
            for pt, v in zip(self.grid.points, self.values):
                coords = pt[:1] if self.grid.mode == "radial" else pt
                w.writerow([repr(float(x)) for x in coords] + [repr(float(v))])


def _vals(x):
    return x.values if isinstance(x, ScalarField) else x


def build_grid(dim: int, mode: str = "tensor", L: float = 6.0, n: int = 1024) -> Grid:
    if dim not in (1, 2, 3):
        raise GridError(f"dimension {dim} not supported (N must be 1, 2 or 3)")
    if mode not in MODES:
        raise GridError(f"unknown grid mode {mode!r}")
    if mode == "tensor" and dim > 2:
        raise GridError("tensor grids are limited to N <= 2; use mode='radial'")
    if not L > 0:
        raise GridError("truncation length L must be positive")
    if n < 16:
        raise GridError("need at least 16 cells per axis")

    if mode == "radial":
        h = L / n
        r = (np.arange(n) + 0.5) * h
        points = np.zeros((n, dim))
        points[:, 0] = r
        weights = sphere_area(dim) * r ** (dim - 1) * h
    else:
        h = 2.0 * L / n
        axis = -L + (np.arange(n) + 0.5) * h
        mesh = np.meshgrid(*([axis] * dim), indexing="ij")
        points = np.stack([m.ravel() for m in mesh], axis=1)
        weights = np.full(n**dim, h**dim)
    return Grid(dim, mode, float(L), int(n), float(h), points, weights)


def integrate(f: ScalarField) -> float:
    vals = f.values
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("cannot integrate non-finite values")
    return float(np.dot(f.grid.weights, vals))


def gradient(u: ScalarField) -> np.ndarray:
    """Central-difference gradient at the nodes, shape ``(M, N)``.

    Tensor grids use zero exterior values.  In radial mode the single column
    holds ``U'(r)``; the mirror condition ``U(-r) = U(r)`` closes the stencil
    at the first cell and the exterior is zero.
    """
    grid = u.grid
    if grid.n < 3:
        raise GridError("gradient needs at least 3 nodes per axis")
    h = grid.h
    if grid.mode == "radial":
        U = u.values
        ext = np.concatenate([[U[0]], U, [0.0]])
        return ((ext[2:] - ext[:-2]) / (2 * h))[:, None]
    arr = u.values.reshape(grid.shape)
    padded = np.pad(arr, 1)
    comps = []
    for ax in range(grid.dim):
        hi = [slice(1, -1)] * grid.dim
        lo = [slice(1, -1)] * grid.dim
        hi[ax] = slice(2, None)
        lo[ax] = slice(None, -2)
        comps.append(((padded[tuple(hi)] - padded[tuple(lo)]) / (2 * h)).ravel())
    return np.stack(comps, axis=1)


def gradient_magnitude(u: ScalarField) -> np.ndarray:
    g = gradient(u)
    return np.sqrt(np.sum(g * g, axis=1))


def tail_mass(u: ScalarField, exponent_values: np.ndarray) -> float:
    """Integral of |u|^p over the outermost cell layer (truncation health)."""
    grid = u.grid
    if grid.mode == "radial":
        mask = grid.radius > grid.L - grid.h
    else:
        mask = np.max(np.abs(grid.points), axis=1) > grid.L - grid.h
    vals = np.abs(u.values[mask]) ** exponent_values[mask]
    return float(np.dot(grid.weights[mask], vals))


def _radial_samples(grid: Grid) -> GradientSamples:
    n, h, dim = grid.n, grid.h, grid.dim
    # edge e joins node e and node e+1 (node n is the exterior zero), at r=(e+1)h
    e = np.arange(n)
    rows = np.concatenate([e, e[:-1]])
    cols = np.concatenate([e, e[:-1] + 1])
    data = np.concatenate([-np.ones(n), np.ones(n - 1)]) / h
    D = sp.csr_matrix((data, (rows, cols)), shape=(n, grid.size))
    edge_w = sphere_area(dim) * ((e + 1) * h) ** (dim - 1) * h
    left = (e + 0.5) * h
    right = (e + 1.5) * h
    pts = np.zeros((2 * n, dim))
    pts[:, 0] = np.concatenate([left, right])
    op = sp.vstack([D, D]).tocsr()
    return GradientSamples((op,), pts, np.concatenate([edge_w, edge_w]) / 2)


def _tensor_samples(grid: Grid) -> GradientSamples:
    n, h, dim, L = grid.n, grid.h, grid.dim, grid.L
    m = n + 1  # anchors per axis: -1..n-1 (forward) or 0..n (backward)
    anchors = np.stack(
        [a.ravel() for a in np.meshgrid(*([np.arange(m)] * dim), indexing="ij")],
        axis=1,
    )

    def index(idx):
        inside = np.all((idx >= 0) & (idx < n), axis=1)
        flat = np.zeros(len(idx), dtype=np.int64)
        mult = 1
        for ax in reversed(range(dim)):
            flat += np.clip(idx[:, ax], 0, n - 1) * mult
            mult *= n
        return flat, inside

    def diff_op(lo_idx, hi_idx):
        rows = np.arange(len(lo_idx))
        fh, ih = index(hi_idx)
        fl, il = index(lo_idx)
        r = np.concatenate([rows[ih], rows[il]])
        c = np.concatenate([fh[ih], fl[il]])
        d = np.concatenate([np.ones(ih.sum()), -np.ones(il.sum())]) / h
        return sp.csr_matrix((d, (r, c)), shape=(len(lo_idx), grid.size))

    ops = [[], []]
    pts = []
    for sign, block in ((1, 0), (-1, 1)):
        base = anchors - 1 if sign == 1 else anchors
        pts.append(-L + (base + 0.5) * h)
        for ax in range(dim):
            step = np.zeros(dim, dtype=np.int64)
            step[ax] = 1
            if sign == 1:
                ops[block].append(diff_op(base, base + step))
            else:
                ops[block].append(diff_op(base - step, base))
    stacked = tuple(sp.vstack([ops[0][ax], ops[1][ax]]).tocsr() for ax in range(dim))
    points = np.concatenate(pts)
    weights = np.full(len(points), h**dim / 2)
    return GradientSamples(stacked, points, weights)
