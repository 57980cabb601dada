import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from vard import build_grid, gaussian_exponent, make_constant_exponent
from vard.functional import mass
from vard.grid import gradient
from vard.modular import norm_X
from vard.thresholds import (
    G,
    ThresholdError,
    brackets,
    choose_a1_a2,
    decay_envelopes,
    estimate_gn_constant,
    gaussian_bound_constants,
    mass_scale_root,
    separation_probe,
    threshold_c0,
    threshold_c1,
    trial_bound_check,
    trial_function,
)

G1 = build_grid(1, "tensor", 6.0, 1024)
X = G1.points[:, 0]


@pytest.mark.parametrize("c,a", [(0.5, 1.0), (0.02, 0.2)])
def test_trial_amplitude_constant_p(c, a, p2):
    got, phi = trial_function(c, p2, G1)
    assert abs(got - a) <= 1e-10
    assert abs(mass(phi, p2) - c) <= 1e-10 * c


def test_G_closed_form(p2):
    for a in (0.1, 1.0, 3.0):
        assert G(a, p2, G1) == pytest.approx(a * a / 2, rel=1e-10)


def test_trial_amplitude_variable_p():
    p = gaussian_exponent(2.0, 2.5)
    g = build_grid(1, "tensor", 6.0, 4096)
    a, _ = trial_function(0.1, p, g)
    _, pp = p.bounds(g)

    def integrand(x):
        px = float(p(np.array([[x]]))[0])
        return a**px / px * math.exp(-math.pi * px * x * x / pp)

    val, _ = quad(integrand, -np.inf, np.inf, epsabs=0, epsrel=1e-13)
    assert abs(val - 0.1) / 0.1 <= 1e-8


def test_mass_scale_fixed_point(gauss):
    p = gaussian_exponent(2.0, 2.5)
    c = mass(gauss, p)
    assert abs(mass_scale_root(gauss, c, p) - 1.0) <= 1e-12


def test_mass_scale_constant_closed_form(p2, gauss):
    c = 0.3
    t = mass_scale_root(gauss, c, p2)
    assert t == pytest.approx(math.sqrt(2 * c / float(np.dot(G1.weights, gauss.values**2))), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), c=st.floats(1e-4, 5.0))
def test_mass_scale_variable(seed, c):
    rng = np.random.default_rng(seed)
    p = gaussian_exponent(1.5, 3.0, width=rng.uniform(0.5, 2))
    u = G1.field(rng.uniform(0.1, 3) * np.exp(-((X - rng.uniform(-1, 1)) ** 2)) * (1 + 0.5 * np.sin(5 * X)))
    t = mass_scale_root(u, c, p)
    assert abs(mass(u * t, p) - c) <= 1e-10 * c


def test_mass_scale_rejects_zero(p2):
    with pytest.raises(ValueError):
        mass_scale_root(G1.zeros(), 0.1, p2)


def test_gaussian_constants_1d():
    k = gaussian_bound_constants(2.0, 2.0, 1)
    assert abs(k.const_c1 - math.pi) <= 1e-10
    assert k.moment_direct == pytest.approx(k.moment_closed, rel=1e-6)
    assert k.moment_closed == pytest.approx(math.pi / 2, rel=1e-12)
    assert k.sign_factor == pytest.approx(2.0)
    assert k.c1_used >= k.c1_rigorous and k.c2_used >= k.c2_rigorous


@pytest.mark.parametrize("c", [0.01, 0.05, 0.3])
def test_gradient_bound_for_trial(c, p2):
    g = build_grid(1, "tensor", 6.0, 4096)
    a, phi = trial_function(c, p2, g)
    grad2 = float(np.dot(g.weights, gradient(phi)[:, 0] ** 2))
    assert grad2 == pytest.approx(a * a * math.pi / 2, rel=5e-5)  # O(h^2) differences
    assert grad2 <= a * a * gaussian_bound_constants(2, 2, 1).const_c1


def test_threshold_c1_value():
    k = gaussian_bound_constants(2.0, 2.0, 1)
    assert threshold_c1(1.0, 2.0, 2.0, k) == pytest.approx(1 / (4 * math.pi), rel=1e-12)


def test_threshold_c1_saturates():
    k = gaussian_bound_constants(2.0, 2.4, 1)
    assert threshold_c1(1e6, 2.0, 2.4, k) == pytest.approx(1 / 2.4)


@pytest.mark.parametrize("frac", [0.1, 0.5, 0.9])
def test_trial_inside_ball_below_c1(frac, p2):
    k = gaussian_bound_constants(2.0, 2.0, 1, k=2.0)
    c = frac * threshold_c1(1.0, 2.0, 2.0, k)
    _, phi = trial_function(c, p2, G1)
    assert norm_X(phi, p2, 2.0) <= 1.0


def test_trial_bound_check_holds(p2):
    out = trial_bound_check(0.05, p2, G1, 2.0)
    assert out["holds"] and out["rho_X"] <= out["bound"]


def test_a1_a2_constant():
    a1, a2 = choose_a1_a2(1.0, 2.0, 2.0)
    assert (a1, a2) == (0.5, 0.75)
    b3, b4 = brackets(1.0, a1, a2, 2.0, 2.0)
    assert b3 == pytest.approx((a2**2 - a1**2) / 2) and b4 == b3


def test_a1_a2_variable():
    a1, a2 = choose_a1_a2(1.0, 2.0, 2.2)
    assert a1 == pytest.approx(0.478801, abs=1e-6)
    assert a1 <= 0.5 * (2 / 2.2) ** (1 / 2.2) + 1e-12
    assert min(brackets(1.0, a1, a2, 2.0, 2.2)) > 0


@settings(max_examples=200, deadline=None)
@given(sigma=st.floats(0.05, 20.0), pm=st.floats(1.1, 4.0), spread=st.floats(0.0, 1.5))
def test_a1_a2_property(sigma, pm, spread):
    pp = pm + spread
    a1, a2 = choose_a1_a2(sigma, pm, pp)
    assert 0 < a1 < a2 < 1
    assert min(brackets(sigma, a1, a2, pm, pp)) > 0


def test_c3_arithmetic(p2):
    q6 = make_constant_exponent(6.0)
    rep = threshold_c0(1.0, p2, q6, G1, 1.0, k=2.0)
    assert rep.alpha_used == pytest.approx(1 / 3)
    # (1/2) (6 * 0.15625)^(2 / (6 * 2/3))
    assert rep.c3_sigma == pytest.approx(0.5 * math.sqrt(6 * 0.15625), rel=1e-12)
    assert rep.c3_sigma == pytest.approx(0.4841229, abs=1e-7)


def test_degenerate_bracket_rejected(p2):
    q6 = make_constant_exponent(6.0)
    with pytest.raises(ThresholdError):
        threshold_c0(1.0, p2, q6, G1, 1.0, k=2.0, radii=(0.6, 0.6))


@pytest.mark.parametrize("sigma", [0.5, 1.0, 3.0])
def test_c0_below_all(sigma, p2):
    q6 = make_constant_exponent(6.0)
    rep = threshold_c0(sigma, p2, q6, G1, 0.9, k=2.0)
    assert rep.c0 < rep.c2_sigma and rep.c0 < rep.c3_sigma and rep.c0 < rep.c4_sigma
    assert '"c0"' in rep.to_json()


def test_gn_estimate_reproducible(p2):
    q6 = make_constant_exponent(6.0)
    a = estimate_gn_constant(G1, p2, q6, size=30, seed=4)
    assert a == estimate_gn_constant(G1, p2, q6, size=30, seed=4)
    assert 0.5 < a < 1.5


def test_decay_envelopes_ordering():
    k = gaussian_bound_constants(2.0, 2.2, 1)
    env = decay_envelopes(0.01, 2.0, 2.2, k)
    assert env["looser"] == max(env["nominal"], env["derived"])
    assert decay_envelopes(0.005, 2.0, 2.2, k)["looser"] < env["looser"]


def test_separation_probe_runs(p2):
    out = separation_probe(0.01, 1.0, p2, make_constant_exponent(6.0), G1, 2.0, a2=0.75, samples=20)
    assert out["probe_count"] + out["probe_misses"] == 20
