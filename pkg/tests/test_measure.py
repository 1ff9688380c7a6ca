import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from fraglog.levy import (eval_phi_inverse, exponential_triplet,
                          constant_jump_triplet, stable_triplet)
from fraglog.measure import (MeasureV, gaver_stehfest, gaver_stehfest_weights,
                             increment_ratio_check,
                             jump_mass_of_inverse_exponent, laplace_of_v)


def test_gs_weights_sum_and_known_inversion():
    # the weights satisfy sum_k w_k / k = 1 (inversion of F(q) = 1/q -> 1)
    for order in (10, 14, 16):
        w = gaver_stehfest_weights(order)
        assert sum(v / (k + 1) for k, v in enumerate(w)) == pytest.approx(1.0, abs=1e-6)
    # slowly varying completely monotone targets (the class inverted here:
    # Vbar/Lbar are monotone power-like functions) invert to ~1e-7
    for t in (0.3, 1.0, 4.0):
        got = gaver_stehfest(lambda q: q ** -1.5, t, order=14)
        assert got == pytest.approx(2.0 * math.sqrt(t / math.pi), rel=1e-6)
    # exponentially decaying targets lose relative accuracy with t, a known
    # real-axis inversion property; absolute accuracy stays high
    for t in (0.3, 1.0, 4.0):
        got = gaver_stehfest(lambda q: 1.0 / (q + 1.0), t, order=14)
        assert got == pytest.approx(math.exp(-t), abs=5e-5)


def test_stable_closed_forms_vs_quadrature():
    g = 1.0
    mv = MeasureV(stable_triplet(g))
    assert mv.mode == "StableClosedForm"
    # Vbar(1) = int_0^1 u * L(du) with L density 1/((g+1)Gamma(1/2) u^{3/2})
    dens = lambda u: 1.0 / ((g + 1.0) * gamma_fn(0.5) * u ** (1.0 / (g + 1.0) + 1.0))
    val, _ = quad(lambda u: u * dens(u), 0.0, 1.0, epsrel=1e-12, epsabs=0.0)
    assert mv.v_bar(1.0) == pytest.approx(val, rel=1e-10)
    assert mv.v_bar(1.0) == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-12)
    assert mv.v_bar(1.0) == pytest.approx(0.564190, rel=1e-5)
    # Lbar tail integral oracle
    tail, _ = quad(dens, 2.0, np.inf, epsrel=1e-12, epsabs=0.0)
    assert mv.l_bar(2.0) == pytest.approx(tail, rel=1e-10)
    assert mv.l_bar(4.0) == pytest.approx(4.0 ** -0.5 / math.sqrt(math.pi), rel=1e-12)


def test_stable_lbar_asymptotic_identity():
    # Lbar(x) ~ Phi_inv(1/x) / Gamma(gamma/(1+gamma)); exact in the stable case
    g = 0.5
    mv = MeasureV(stable_triplet(g))
    x = 1e6
    expect = eval_phi_inverse(stable_triplet(g), 1.0 / x) / gamma_fn(g / (1 + g))
    assert mv.l_bar(x) == pytest.approx(expect, rel=1e-3)


def test_stable_regular_variation_slope():
    g = 0.5
    mv = MeasureV(stable_triplet(g))
    xs = np.logspace(2, 8, 13)
    ls = np.log([mv.l_bar(x) for x in xs])
    slopes = np.diff(ls) / np.diff(np.log(xs))
    assert np.allclose(slopes, -1.0 / (g + 1.0), atol=1e-6)


def test_numeric_inversion_against_stable_transforms():
    # run the Gaver-Stehfest machinery on the *stable* transforms, where the
    # answer is known in closed form
    g = 0.5
    tr = stable_triplet(g)
    gp = g / (g + 1.0)
    for x in (0.5, 2.0, 10.0):
        vbar_num = gaver_stehfest(lambda q: laplace_of_v(tr, q) / q, x, order=14)
        assert vbar_num == pytest.approx(x**gp / (g * gamma_fn(gp)), rel=1e-7)
        lbar_num = gaver_stehfest(
            lambda q: eval_phi_inverse(tr, q) / q, x, order=14)
        assert lbar_num == pytest.approx(x ** (-1 / (g + 1)) / gamma_fn(gp), rel=1e-7)


def test_laplace_of_v_self_consistency():
    # formula vs central finite differences of Phi_inverse
    tr = exponential_triplet()
    for q in (0.5, 1.0, 3.0):
        eps = 1e-4 * q
        fd = (eval_phi_inverse(tr, q + eps) - eval_phi_inverse(tr, q - eps)) / (2 * eps)
        assert laplace_of_v(tr, q) == pytest.approx(fd - tr.drift_atom(), rel=1e-6)
    # stable closed form: (1/(g+1)) q^{-g/(g+1)}
    g = 1.0
    assert laplace_of_v(stable_triplet(g), 4.0) == pytest.approx(0.25, rel=1e-12)


def test_vbar_monotone_lbar_decreasing_numeric():
    mv = MeasureV(exponential_triplet())
    xs = np.logspace(-2, 3, 40)
    vb = np.array([mv.v_bar(x) for x in xs])
    lb = np.array([mv.l_bar(x) for x in xs])
    assert np.all(np.diff(vb) >= -1e-9)
    assert np.all(np.diff(lb) <= 1e-9)


def test_subadditivity_with_atom():
    rng = np.random.default_rng(7)
    for tr in (exponential_triplet(), exponential_triplet(kappa=0.5)):
        mv = MeasureV(tr)
        atom = tr.drift_atom()
        for _ in range(25):
            x, y = rng.uniform(0.05, 30.0, 2)
            assert mv.v_bar(x + y) <= mv.v_bar(x) + mv.v_bar(y) + atom + 1e-6


def test_total_mass_with_killing():
    tr = exponential_triplet(kappa=0.5)
    mv = MeasureV(tr)
    expect = 1.0 / 0.5 - 1.0 / (0.5 + 1.0)
    assert mv.v_bar_total() == pytest.approx(expect, rel=1e-12)
    assert mv.v_bar(2e4) == pytest.approx(expect, rel=1e-3)
    assert MeasureV(exponential_triplet()).v_bar_total() == math.inf


def test_finiteness_dichotomy():
    # c = 0, constant jumps: L(0,inf) = (1/(kappa+lam)) int x^{-1} pi(dx)
    tr = constant_jump_triplet(2.0, 1.5, kappa=0.25)
    got = jump_mass_of_inverse_exponent(tr)
    expect = (2.0 / 1.5) / (0.25 + 2.0)
    assert got == pytest.approx(expect, rel=1e-4)
    # exponential jumps: int x^{-1} pi(dx) = inf, so the limit keeps growing
    lo = jump_mass_of_inverse_exponent(exponential_triplet(), q_large=1e6)
    hi = jump_mass_of_inverse_exponent(exponential_triplet(), q_large=1e12)
    assert hi > lo * 1.5


def test_increment_ratio():
    for g, target in ((0.5, 2.0 / 3.0), (1.0, 0.5)):
        mv = MeasureV(stable_triplet(g))
        assert increment_ratio_check(mv, 1e8, 1e4) == pytest.approx(target, abs=1e-3)
    # delta -> 0 at fixed x: exact local derivative x-density ratio
    g = 0.5
    mv = MeasureV(stable_triplet(g))
    x = 50.0
    got = increment_ratio_check(mv, x, 1e-7 * x)
    assert got == pytest.approx(1.0 / (1.0 + g), rel=1e-6)


def test_vbar_error_estimates_small_on_smooth_input():
    mv = MeasureV(exponential_triplet())
    val, err = mv.v_bar_with_error(5.0)
    assert val > 0 and err < 1e-6 * max(val, 1.0)
