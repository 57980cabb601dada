import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vard import build_grid, gaussian_exponent, make_constant_exponent
from vard.functional import (
    GNError,
    constraint_gradient,
    energy,
    energy_gradient,
    energy_value,
    gn_ratio,
    mass,
    smoothing_eps,
)
from vard.modular import ModularSpec, modular_lp
from vard.thresholds import gn_family

G1 = build_grid(1, "tensor", 6.0, 1024)
X = G1.points[:, 0]


def test_zero_field_energy(p2, q4):
    rep = energy(G1.zeros(), p2, q4, 2.0)
    assert rep.grad_term == rep.confine_term == rep.nonlinear_term == rep.energy == rep.mass == 0.0


def test_gaussian_energy_terms(p2, q4, gauss):
    rep = energy(gauss, p2, q4, 2.0)
    assert rep.grad_term == pytest.approx(math.sqrt(math.pi / 2) / 2, rel=1e-4)  # 0.626657
    assert rep.confine_term == pytest.approx(math.sqrt(math.pi / 2) / 8, rel=1e-7)  # 0.156664
    assert rep.nonlinear_term == pytest.approx(math.sqrt(math.pi) / 8, rel=1e-7)  # 0.221557
    assert rep.energy == pytest.approx(rep.grad_term + rep.confine_term - rep.nonlinear_term)


def test_gradient_term_second_order(p2, q4):
    errs = []
    for n in (256, 512, 1024):
        g = build_grid(1, "tensor", 6.0, n)
        u = g.field(np.exp(-g.points[:, 0] ** 2))
        errs.append(abs(energy(u, p2, q4, 2.0).grad_term - math.sqrt(math.pi / 2) / 2))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_mass_constant_exponent(p2, gauss):
    assert mass(gauss, p2) == pytest.approx(modular_lp(gauss, ModularSpec(p2)) / 2, rel=1e-14)
    assert mass(gauss, p2) == pytest.approx(math.sqrt(math.pi / 2) / 2, abs=1e-7)
    assert mass(G1.zeros(), p2) == 0.0


@settings(max_examples=30, deadline=None)
@given(t1=st.floats(0.01, 10.0), t2=st.floats(0.01, 10.0))
def test_mass_monotone(t1, t2, gauss):
    p = gaussian_exponent(1.5, 2.5)
    if t1 < t2 * (1 - 1e-9):
        assert mass(gauss * t1, p) < mass(gauss * t2, p)


def _fd_check(u, p, q, k, tol):
    g = u.grid
    grad = energy_gradient(u, p, q, k).values * g.weights
    rng = np.random.default_rng(0)
    idx = rng.choice(np.arange(5, g.size - 5), 40, replace=False)
    worst = 0.0
    for i in idx:
        h = 1e-6 * (1 + abs(u.values[i]))
        up, um = u.values.copy(), u.values.copy()
        up[i] += h
        um[i] -= h
        fd = (energy_value(g.field(up), p, q, k) - energy_value(g.field(um), p, q, k)) / (2 * h)
        worst = max(worst, abs(fd - grad[i]) / max(abs(grad[i]), 1e-3 * np.max(np.abs(grad))))
    assert worst <= tol


def test_gradient_finite_differences_constant(p2, q4):
    g = build_grid(1, "tensor", 6.0, 512)
    rng = np.random.default_rng(3)
    x = g.points[:, 0]
    u = g.field(np.exp(-x * x) * (1 + 0.3 * np.sin(3 * x)) + 0.01 * rng.normal(size=g.size) * np.exp(-x * x))
    _fd_check(u, p2, q4, 2.0, 1e-6)


def test_gradient_finite_differences_variable(q4):
    g = build_grid(1, "tensor", 6.0, 512)
    x = g.points[:, 0]
    _fd_check(g.field(np.exp(-x * x) * (1 + 0.2 * x)), gaussian_exponent(2.0, 2.5), q4, 2.0, 1e-5)


def test_gradient_is_discrete_laplacian(p2):
    # p = 2, k = 0, no q-term: tridiagonal -u'' stencil with zero exterior,
    # plus u from the k = 0 confinement (|x|^0 = 1)
    qoff = make_constant_exponent(60.0)  # |u|^60 with |u| <= 0.5 is below round-off
    g = build_grid(1, "tensor", 4.0, 200)
    x = g.points[:, 0]
    u = 0.5 * np.exp(-x * x)
    pad = np.concatenate([[0.0], u, [0.0]])
    lap = -(pad[2:] - 2 * pad[1:-1] + pad[:-2]) / g.h**2
    got = energy_gradient(g.field(u), p2, qoff, 0.0).values - u
    assert np.max(np.abs(got - lap)) <= 1e-10 * np.max(np.abs(lap)) + 1e-16


def test_gradient_is_5_point_laplacian_2d(p2):
    qoff = make_constant_exponent(60.0)
    g = build_grid(2, "tensor", 3.0, 40)
    u = 0.5 * np.exp(-g.radius**2)
    U = np.pad(u.reshape(40, 40), 1)
    lap = -(U[2:, 1:-1] + U[:-2, 1:-1] + U[1:-1, 2:] + U[1:-1, :-2] - 4 * U[1:-1, 1:-1]) / g.h**2
    got = (energy_gradient(g.field(u), p2, qoff, 0.0).values - u).reshape(40, 40)
    assert np.max(np.abs(got - lap)) <= 1e-10 * np.max(np.abs(lap))


def test_constraint_gradient_p2_is_identity(p2, gauss):
    assert np.array_equal(constraint_gradient(gauss, p2).values, gauss.values)


def test_constraint_gradient_zero():
    assert constraint_gradient(G1.zeros(), gaussian_exponent(2.0, 3.0)).is_zero()


def test_constraint_gradient_directional_derivative(gauss):
    p = gaussian_exponent(2.0, 2.6)
    d = G1.field(np.sin(X) * np.exp(-X * X / 4))
    t = 1e-6
    fd = (mass(gauss + d * t, p) - mass(gauss - d * t, p)) / (2 * t)
    an = float(np.dot(G1.weights, constraint_gradient(gauss, p).values * d.values))
    assert fd == pytest.approx(an, rel=1e-7)


def test_smoothing_only_below_two():
    assert smoothing_eps(make_constant_exponent(2.0), G1) == 0.0
    assert smoothing_eps(gaussian_exponent(1.5, 2.5), G1) == 1e-10


def test_gn_gaussian(p2, q4, gauss):
    rep = gn_ratio(gauss, p2, q4)
    assert rep.alpha == pytest.approx(0.25)
    # ||u||_4 = (sqrt(pi)/2)^(1/4), ||u||_2 = ||u'||_2 = (pi/2)^(1/4)
    assert rep.lhs == pytest.approx((math.sqrt(math.pi) / 2) ** 0.25, rel=1e-8)
    assert rep.rhs_base == pytest.approx((math.pi / 2) ** 0.25, rel=1e-4)
    assert rep.lhs == pytest.approx(0.97026, abs=1e-4)
    assert rep.rhs_base == pytest.approx(1.11951, abs=1e-4)
    assert rep.ratio == pytest.approx(0.86668, abs=1e-4)


@pytest.mark.parametrize("t", [0.1, 3.0, 40.0])
def test_gn_scale_invariant(t, p2, q4, gauss):
    assert gn_ratio(gauss * t, p2, q4).ratio == pytest.approx(gn_ratio(gauss, p2, q4).ratio, rel=1e-9)


def test_gn_bounded_over_family(p2):
    q6 = make_constant_exponent(6.0)
    ratios = [gn_ratio(u, p2, q6).ratio for u in gn_family(G1, size=50, seed=1)]
    assert np.all(np.isfinite(ratios)) and min(ratios) > 0 and max(ratios) < 10


def test_gn_zero_rejected(p2, q4):
    with pytest.raises(GNError):
        gn_ratio(G1.zeros(), p2, q4)
