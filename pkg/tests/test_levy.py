import math

import numpy as np
import pytest
from scipy.integrate import quad

from fraglog.errors import EvaluationError, RangeError
from fraglog.levy import (DiscreteLaw, ExponentialLaw,
                          FiniteJump, LevyTriplet, NegLogBetaLaw, StableTail,
                          TabulatedDensity, UniformLaw, constant_jump_triplet,
                          eval_big_phi, eval_phi, eval_phi_inverse,
                          exponential_triplet, moments, stable_triplet,
                          uniform_jump_triplet)


def phi_by_quadrature(triplet, q):
    """Oracle: kappa + c q + int (1 - e^{-qx}) density(x) dx for the named
    finite jump laws."""
    law = triplet.jumps.law
    lam = triplet.jumps.total_rate
    if isinstance(law, ExponentialLaw):
        dens = lambda x: law.theta * math.exp(-law.theta * x)
        hi = 200.0 / law.theta
    elif isinstance(law, UniformLaw):
        dens = lambda x: 1.0 / law.b if x < law.b else 0.0
        hi = law.b
    else:
        raise AssertionError
    val, _ = quad(lambda x: -math.expm1(-q * x) * dens(x), 0.0, hi,
                  epsabs=0.0, epsrel=1e-12, limit=300)
    return triplet.kappa + triplet.c * q + lam * val


def test_stable_phi_closed_form():
    assert eval_phi(stable_triplet(1.0), 3.0) == 6.0
    for g in (0.3, 0.5, 0.9):
        tr = stable_triplet(g)
        for q in (0.1, 1.0, 7.0):
            assert eval_phi(tr, q) == (g + 1.0) * q**g
            assert eval_big_phi(tr, q) == q ** (g + 1.0)


def test_phi_at_zero_is_kappa():
    tr = LevyTriplet(0.7, 0.2, FiniteJump(1.0, ExponentialLaw(1.0)))
    assert eval_phi(tr, 0.0) == 0.7
    assert eval_big_phi(tr, 0.0) == 0.0


def test_exponential_closed_forms_vs_quadrature():
    tr = exponential_triplet()
    assert eval_phi(tr, 1.0) == pytest.approx(0.5, abs=1e-14)
    assert eval_phi(tr, 1.0) == pytest.approx(phi_by_quadrature(tr, 1.0), rel=1e-10)
    assert eval_big_phi(tr, 1.0) == pytest.approx(1.0 - math.log(2.0), rel=1e-13)
    assert eval_big_phi(tr, 1.0) == pytest.approx(0.306853, rel=1e-5)
    # numeric integral of phi as the big-phi oracle
    val, _ = quad(lambda s: eval_phi(tr, s), 0.0, 1.0, epsrel=1e-12, epsabs=0.0)
    assert eval_big_phi(tr, 1.0) == pytest.approx(val, rel=1e-10)


def test_uniform_and_constant_and_discrete_laws():
    tru = uniform_jump_triplet(1.3, 2.0, c=0.1, kappa=0.2)
    for q in (0.3, 1.0, 4.0):
        assert eval_phi(tru, q) == pytest.approx(phi_by_quadrature(tru, q), rel=1e-10)
        val, _ = quad(lambda s: eval_phi(tru, s), 0.0, q, epsrel=1e-12, epsabs=0.0)
        assert eval_big_phi(tru, q) == pytest.approx(val, rel=1e-10)
    trc = constant_jump_triplet(2.0, 0.7)
    assert eval_phi(trc, 1.0) == pytest.approx(2.0 * -math.expm1(-0.7), rel=1e-14)
    law = DiscreteLaw((0.5, 2.0), (0.25, 0.75))
    trd = LevyTriplet(0.0, 0.0, FiniteJump(1.0, law))
    expect = 0.25 * -math.expm1(-0.5) + 0.75 * -math.expm1(-2.0)
    assert eval_phi(trd, 1.0) == pytest.approx(expect, rel=1e-14)
    assert law.mean() == pytest.approx(0.25 * 0.5 + 0.75 * 2.0)


def test_neg_log_beta_reduces_to_exponential_at_k2():
    nlb = NegLogBetaLaw(2)
    ex = ExponentialLaw(2.0)
    for q in (0.2, 1.0, 5.0):
        assert nlb.phi_unit(q) == pytest.approx(ex.phi_unit(q), rel=1e-12)
    assert nlb.mean() == pytest.approx(0.5, rel=1e-12)
    assert nlb.second_moment() == pytest.approx(0.5, rel=1e-12)


def test_phi_inverse_roundtrip_and_examples():
    assert eval_phi_inverse(stable_triplet(0.5), 8.0) == pytest.approx(4.0, rel=1e-14)
    assert eval_phi_inverse(exponential_triplet(), 0.0) == 0.0
    tr = exponential_triplet()
    y = eval_big_phi(tr, 1.0)
    assert eval_phi_inverse(tr, y) == pytest.approx(1.0, abs=1e-9)
    for q in np.logspace(-6, 3, 25):
        got = eval_phi_inverse(tr, eval_big_phi(tr, q))
        assert got == pytest.approx(q, rel=1e-10)


def test_phi_inverse_range_error():
    with pytest.raises(RangeError):
        eval_phi_inverse(exponential_triplet(), 1e309)


def test_phi_concavity_and_ratio_monotone():
    rng = np.random.default_rng(42)
    triplets = [exponential_triplet(), uniform_jump_triplet(0.5, 3.0, c=0.2),
                stable_triplet(0.6), constant_jump_triplet(1.0, 1.5, kappa=0.3)]
    for tr in triplets:
        qs = np.sort(rng.uniform(0.01, 50.0, 40))
        phis = np.array([eval_phi(tr, q) for q in qs])
        mids = np.array([eval_phi(tr, 0.5 * (a + b)) for a, b in zip(qs[:-1], qs[1:])])
        assert np.all(mids >= 0.5 * (phis[:-1] + phis[1:]) - 1e-12)
        ratio = phis / qs
        assert np.all(np.diff(ratio) <= 1e-12)


def test_moments():
    mom = moments(exponential_triplet())
    assert mom.m == pytest.approx(1.0) and mom.a == pytest.approx(2.0)
    # quadrature oracle for the exponential law moments
    m_int, _ = quad(lambda x: x * math.exp(-x), 0, 60)
    a_int, _ = quad(lambda x: x * x * math.exp(-x), 0, 60)
    assert mom.m == pytest.approx(m_int, rel=1e-9)
    assert mom.a == pytest.approx(a_int, rel=1e-9)
    mom2 = moments(exponential_triplet(rate=2.0, theta=2.0))
    assert mom2.m == pytest.approx(1.0) and mom2.a == pytest.approx(1.0)
    assert moments(stable_triplet(0.5)).m == math.inf
    assert moments(stable_triplet(0.7)).gamma_est == pytest.approx(0.7, abs=0.01)
    m1 = moments(stable_triplet(1.0))
    assert (m1.m, m1.a, m1.gamma_est) == (2.0, 0.0, 1.0)
    # regular exponential triplet: phi ~ m q at 0, slope estimate near 1
    assert moments(exponential_triplet()).gamma_est == pytest.approx(1.0, abs=0.01)


def test_tabulated_density():
    xs = np.linspace(0.05, 40.0, 400)
    tab = TabulatedDensity(tuple(xs), tuple(np.exp(-xs)), pow0=0.0, pow_inf=-30.0)
    tr = LevyTriplet(0.0, 0.0, tab)
    ref = exponential_triplet()
    for q in (0.5, 1.0, 3.0):
        assert eval_phi(tr, q) == pytest.approx(eval_phi(ref, q), rel=2e-3)
    assert tr.jumps.mass() == pytest.approx(1.0, rel=2e-3)
    with pytest.raises(EvaluationError):
        TabulatedDensity((1.0, 2.0), (1.0, 1.0), pow0=0.0, pow_inf=-0.5)
    with pytest.raises(EvaluationError):
        TabulatedDensity((1.0, 2.0), (1.0, 1.0), pow0=-2.5, pow_inf=-3.0)


def test_drift_atom():
    assert exponential_triplet().drift_atom() == 1.0
    assert exponential_triplet(kappa=1.0).drift_atom() == 0.5
    assert exponential_triplet(c=0.5).drift_atom() == 0.0
    assert stable_triplet(0.5).drift_atom() == 0.0
    assert stable_triplet(1.0).drift_atom() == 0.0


def test_invalid_inputs():
    with pytest.raises(ValueError):
        eval_phi(exponential_triplet(), -1.0)
    with pytest.raises(ValueError):
        StableTail(1.5)
    with pytest.raises(ValueError):
        LevyTriplet(0.0, 0.0, None)
    with pytest.raises(ValueError):
        FiniteJump(0.0, ExponentialLaw(1.0))
