import math

import numpy as np
import pytest
from scipy.integrate import quad

from fraglog.bessel import (ASYMPTOTIC_CUTOFF, bessel_k, bessel_k_scaled,
                            exp_pair_integral, log_bessel_k,
                            log_exp_pair_integral)


def quad_bessel(alpha, x):
    """Independent oracle: direct quadrature of the cosh integral."""
    val, _ = quad(lambda u: math.exp(-x * math.cosh(u)) * math.cosh(alpha * u),
                  0.0, 40.0, epsabs=1e-300, epsrel=1e-13, limit=400)
    return val


def test_half_order_closed_form():
    # K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}
    for x in (1.0, 2.0, 7.5):
        expect = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x)
        assert bessel_k(0.5, x) == pytest.approx(expect, rel=1e-11)
    assert bessel_k(0.5, 2.0) == pytest.approx(0.119938, rel=1e-5)
    assert bessel_k(0.5, 1.0) == pytest.approx(0.461069, rel=1e-5)


def test_against_quadrature_oracle():
    for alpha in (0.0, 1.0 / 3.0, 0.7, 1.5, 2.0):
        for x in (0.05, 0.8, 5.0, 20.0):
            assert bessel_k(alpha, x) == pytest.approx(quad_bessel(alpha, x), rel=1e-9)


def test_method_switch_is_smooth():
    for alpha in np.linspace(0.0, 2.0, 9):
        below = bessel_k_scaled(alpha, ASYMPTOTIC_CUTOFF - 1e-9)
        above = bessel_k_scaled(alpha, ASYMPTOTIC_CUTOFF)
        assert below.method == "IntegralRep"
        assert above.method == "AsymptoticSeries"
        assert below.value == pytest.approx(above.value, rel=1e-8)


def test_methods_agree_on_overlap():
    from fraglog.bessel import _asymptotic_scaled, _cosh_integral_scaled
    for alpha in (0.25, 0.5, 1.0, 2.0):
        for x in (25.0, 30.0, 40.0):
            assert _cosh_integral_scaled(alpha, x) == pytest.approx(
                _asymptotic_scaled(alpha, x), rel=1e-7)


def test_large_argument_log_form():
    # far beyond double underflow: check against the leading asymptotic order
    lk = log_bessel_k(0.5, 2000.0)
    expect = 0.5 * math.log(math.pi / 4000.0) - 2000.0
    assert lk == pytest.approx(expect, rel=1e-12)


def test_positive_and_domain_errors():
    assert bessel_k(1.3, 0.01) > 0
    with pytest.raises(ValueError):
        bessel_k(0.5, 0.0)
    with pytest.raises(ValueError):
        bessel_k(0.5, -1.0)
    with pytest.raises(ValueError):
        bessel_k(-0.1, 1.0)
    with pytest.raises(ValueError):
        bessel_k(2.5, 1.0)


def quad_pair(alpha, r, s):
    val, _ = quad(lambda x: x ** (alpha - 1.0) * math.exp(-r * x - s / x),
                  0.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=400)
    return val


def test_exp_pair_integral_values():
    # alpha=1/2, r=s=1: 2 K_{1/2}(2) = sqrt(pi) e^{-2}
    assert exp_pair_integral(0.5, 1.0, 1.0) == pytest.approx(
        math.sqrt(math.pi) * math.exp(-2.0), rel=1e-11)
    assert exp_pair_integral(0.5, 1.0, 1.0) == pytest.approx(0.239877, rel=1e-5)
    # r = s: the power prefactor drops out
    for alpha in (0.3, 1.0):
        assert exp_pair_integral(alpha, 1.7, 1.7) == pytest.approx(
            2.0 * bessel_k(alpha, 3.4), rel=1e-12)
    # quadrature oracle
    assert exp_pair_integral(0.5, 4.0, 9.0) == pytest.approx(
        quad_pair(0.5, 4.0, 9.0), rel=1e-9)
    assert exp_pair_integral(2.0 / 3.0, 0.5, 2.0) == pytest.approx(
        quad_pair(2.0 / 3.0, 0.5, 2.0), rel=1e-9)


def test_log_exp_pair_matches_linear_scale():
    for alpha, r, s in ((0.5, 1.0, 1.0), (1.0 / 3.0, 2.0, 0.5)):
        assert math.exp(log_exp_pair_integral(alpha, r, s)) == pytest.approx(
            exp_pair_integral(alpha, r, s), rel=1e-12)
    with pytest.raises(ValueError):
        exp_pair_integral(0.5, -1.0, 1.0)
