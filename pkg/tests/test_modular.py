import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vard import build_grid, gaussian_exponent, make_constant_exponent, make_custom_exponent
from vard.modular import (
    ModularSpec,
    check_modular_norm_relations,
    gradient_norm,
    luxemburg,
    luxemburg_norm,
    modular_lp,
    modular_norm_X,
    modular_X,
    modular_X_tilde,
    norm_X,
)

G1 = build_grid(1, "tensor", 6.0, 1024)
X = G1.points[:, 0]


def _random_field(rng, grid=G1):
    x = grid.points[:, 0]
    v = np.zeros(grid.size)
    for _ in range(rng.integers(1, 4)):
        v += rng.uniform(-2, 2) * np.exp(-((x - rng.uniform(-2, 2)) ** 2) / rng.uniform(0.1, 2.0))
    return grid.field(v)


def test_modular_gaussian(p2, gauss):
    assert modular_lp(gauss, ModularSpec(p2, 0.0)) == pytest.approx(math.sqrt(math.pi / 2), abs=1e-7)


def test_modular_weighted(p2, gauss):
    assert modular_lp(gauss, ModularSpec(p2, 2.0)) == pytest.approx(math.sqrt(math.pi / 2) / 4, abs=1e-7)


def test_modular_of_zero(p2):
    assert modular_lp(G1.zeros(), ModularSpec(p2)) == 0.0
    assert luxemburg_norm(G1.zeros(), ModularSpec(p2)) == 0.0
    assert modular_X(G1.zeros(), p2, 2.0) == 0.0
    assert modular_X_tilde(G1.zeros(), p2, 2.0) == 0.0
    assert norm_X(G1.zeros(), p2, 2.0) == 0.0


def test_constant_exponent_norm_closed_form(p2, gauss):
    # (pi/2)^(1/4)
    assert luxemburg_norm(gauss, ModularSpec(p2)) == pytest.approx((math.pi / 2) ** 0.25, rel=1e-7)


def test_piecewise_quartic_example():
    # u = 2 on [0, 2], p = 2 on [0, 1], p = 4 on (1, 2]: (2/eta)^2 + (2/eta)^4 = 1
    n = 2000
    w = np.full(n, 2.0 / n)
    x = (np.arange(n) + 0.5) * 2.0 / n
    p = np.where(x <= 1.0, 2.0, 4.0)
    t = math.sqrt((math.sqrt(5) - 1) / 2)
    assert luxemburg(np.full(n, 2.0), p, w) == pytest.approx(2 / t, abs=1e-10)
    assert 2 / t == pytest.approx(2.5441, abs=1e-4)


def test_tilde_is_rho_over_p(gauss):
    p = make_constant_exponent(3.0)
    assert modular_X_tilde(gauss, p, 2.0) == pytest.approx(modular_X(gauss, p, 2.0) / 3.0, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_tilde_ratio_between_exponent_bounds(seed):
    rng = np.random.default_rng(seed)
    p = gaussian_exponent(2.0, 2.8)
    u = _random_field(rng)
    pm, pp = p.bounds(G1)
    ratio = modular_X(u, p, 2.0) / modular_X_tilde(u, p, 2.0)
    assert pm * (1 - 1e-12) <= ratio <= pp * (1 + 1e-12)


def test_norm_X_reduces_to_l2_sum(p2, gauss):
    l2 = math.sqrt(float(np.dot(G1.weights, gauss.values**2)))
    assert norm_X(gauss, p2, 0.0) == pytest.approx(l2 + gradient_norm(gauss, p2), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(t1=st.floats(0.05, 5.0), t2=st.floats(0.05, 5.0))
def test_norm_X_monotone_in_scaling(t1, t2):
    p = gaussian_exponent(2.0, 2.5)
    u = G1.field(np.exp(-X * X))
    if t1 < t2 * (1 - 1e-9):
        assert norm_X(u * t1, p, 2.0) < norm_X(u * t2, p, 2.0)


def test_unit_norm_gives_unit_modular():
    p = gaussian_exponent(2.0, 3.0)
    spec = ModularSpec(p, 2.0)
    u = G1.field(np.exp(-X * X) * (1 + X))
    v = u / luxemburg_norm(u, spec)
    assert abs(modular_lp(v, spec) - 1.0) <= 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_norm_two_power_bounds(seed):
    p = gaussian_exponent(2.0, 3.0)
    spec = ModularSpec(p, 0.0)
    u = _random_field(np.random.default_rng(seed))
    v = u * (2.0 / luxemburg_norm(u, spec))
    rho = modular_lp(v, spec)
    assert 4.0 * (1 - 1e-10) <= rho <= 8.0 * (1 + 1e-10)


@pytest.mark.parametrize("p0", [1.5, 2.0, 3.7])
def test_constant_exponent_rho_is_norm_power(p0, gauss):
    p = make_constant_exponent(p0)
    spec = ModularSpec(p, 1.0)
    for t in (0.3, 1.0, 4.0):
        u = gauss * t
        assert modular_lp(u, spec) == pytest.approx(luxemburg_norm(u, spec) ** p0, rel=1e-10)


def test_relations_report_passes_and_serialises():
    p = gaussian_exponent(2.0, 2.6)
    u = G1.field(3 * np.exp(-X * X))
    rep = check_modular_norm_relations(u, ModularSpec(p, 2.0))
    assert rep.passed
    assert len(rep.checks) == 5
    assert '"checks"' in rep.to_json()


def test_relations_reject_zero(p2):
    with pytest.raises(ValueError):
        check_modular_norm_relations(G1.zeros(), ModularSpec(p2))


def test_induced_norm_power_bounds():
    p = gaussian_exponent(2.0, 2.5)
    u = G1.field(np.exp(-X * X))
    for t in (0.2, 5.0):
        v = u * t
        n, rho = modular_norm_X(v, p, 2.0), modular_X(v, p, 2.0)
        lo, hi = sorted((n**2, n**2.5))
        assert lo * (1 - 1e-10) <= rho <= hi * (1 + 1e-10)


def test_luxemburg_custom_exponent_2d():
    g = build_grid(2, "tensor", 3.0, 48)
    p = make_custom_exponent(lambda x: 2.0 + 0.2 * np.tanh(x[:, 0]), lambda x: np.stack(
        [0.2 / np.cosh(x[:, 0]) ** 2, 0 * x[:, 1]], axis=1), 0.2)
    u = g.field(np.exp(-g.radius**2))
    spec = ModularSpec(p, 0.0)
    assert modular_lp(u / luxemburg_norm(u, spec), spec) == pytest.approx(1.0, abs=1e-10)


def test_negative_weight_power_rejected(p2):
    with pytest.raises(ValueError):
        ModularSpec(p2, -1.0)
