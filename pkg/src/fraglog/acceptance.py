"""The acceptance matrix: every criterion the build must satisfy, runnable
from pytest (tests/test_acceptance.py) or `fraglog verify`.

Each criterion returns (passed, detail).  Tiers: "fast" criteria are closed
-form or small-MC checks (seconds); "full" adds the large Monte Carlo and
disk runs.  All Monte Carlo uses fixed seeds, so outcomes are reproducible.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from ._rng import RngStream
from .bessel import exp_pair_integral
from .disk import HitAngles, decay_shape, mean_perimeter_deficit, perimeter_deficit
from .fragmentation import binary_uniform, dislocation_to_triplet, moment_sums_bulk, simulate_fragmentation, size_biased_mass, spine_interval_mass
from .levy import exponential_triplet, stable_triplet
from .measure import MeasureV, increment_ratio_check
from .simulate import sample_d_gamma, sample_xi_rho
from .stats import ks_2sample_critical, ks_2sample_statistic
from .transform import (fragmentation_moment, laplace_xi_rho,
                        laplace_xi_rho_gaussian_form, log_asymptotic_laplace,
                        log_laplace_xi_rho, uniform_envelope)

DEFAULT_SEED = 20260401


def crit01_gamma1_exact(seed=DEFAULT_SEED):
    """Transform of the deterministic gamma=1 case equals e^{-2 q sqrt(t)}."""
    tr = stable_triplet(1.0)
    worst = 0.0
    for q in (0.5, 1.0, 2.0):
        for t in (1.0, 10.0, 100.0):
            err = abs(laplace_xi_rho(tr, q, t) - math.exp(-2.0 * q * math.sqrt(t)))
            worst = max(worst, err)
    return worst < 1e-8, f"max |error| = {worst:.2e} (tol 1e-8)"


def crit02_bessel_identity(seed=DEFAULT_SEED):
    """int x^(a-1) e^(-rx-s/x) dx vs 2 (s/r)^(a/2) K_a(2 sqrt(rs))."""
    worst = 0.0
    for alpha in (1.0 / 3.0, 0.5, 2.0 / 3.0):
        for r in (0.5, 2.0):
            for s in (0.5, 2.0):
                direct, _ = quad(lambda x: x ** (alpha - 1.0) * math.exp(-r * x - s / x),
                                 0.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=400)
                closed = exp_pair_integral(alpha, r, s)
                worst = max(worst, abs(direct - closed) / closed)
    return worst < 1e-8, f"max rel diff = {worst:.2e} (tol 1e-8)"


def crit03_route_equivalence(seed=DEFAULT_SEED):
    """Saddle-form and Gaussian-kernel-form transforms agree."""
    worst = 0.0
    for g in (0.5, 1.0):
        tr = stable_triplet(g)
        for q in (0.5, 1.0, 2.0):
            for t in (1.0, 10.0, 100.0):
                a = laplace_xi_rho(tr, q, t)
                b = laplace_xi_rho_gaussian_form(tr, q, t)
                worst = max(worst, abs(a - b))
    return worst <= 1e-6, f"max |difference| = {worst:.2e} (tol 1e-6)"


def crit04_stationarity(seed=DEFAULT_SEED):
    """Scaled transform is t-free (analytic) and samples at t=1 vs t=16 pass
    a two-sample KS test at the 0.1% level."""
    g = 0.5
    tr = stable_triplet(g)
    worst = 0.0
    for lam in (0.5, 1.0, 2.0):
        vals = [laplace_xi_rho(tr, lam * t ** (-1.0 / (g + 1.0)), t)
                for t in (1.0, 10.0, 100.0)]
        worst = max(worst, max(vals) - min(vals))
    analytic_ok = worst < 1e-7

    n = 100_000
    s1 = sample_d_gamma(g, n, RngStream(seed, (41,)), t=1.0)
    s16 = sample_d_gamma(g, n, RngStream(seed, (42,)), t=16.0)
    ks = ks_2sample_statistic(s1, s16)
    crit = ks_2sample_critical(n, n, 0.001)
    mc_ok = ks < crit
    return analytic_ok and mc_ok, (
        f"analytic spread {worst:.2e} (tol 1e-7); KS {ks:.5f} vs crit {crit:.5f}")


def crit05_mc_vs_formula(seed=DEFAULT_SEED):
    """1e6-path Monte Carlo of e^{-q xi_rho(t)} vs the numeric-inversion
    quadrature, within 3 standard errors, exponential(1) jumps."""
    tr = exponential_triplet()
    mv = MeasureV(tr)
    ts = [1.0, 5.0, 20.0]
    n = 1_000_000
    xi, _ = sample_xi_rho(tr, ts, n, RngStream(seed, (5,)))
    details, ok = [], True
    for j, t in enumerate(ts):
        for q in (1.0, 2.0):
            v = np.exp(-q * xi[:, j])
            mc, se = v.mean(), v.std() / math.sqrt(n)
            pred = laplace_xi_rho(tr, q, t, measure=mv)
            z = (mc - pred) / se
            ok &= abs(z) <= 3.0
            details.append(f"(q={q:g},t={t:g}) z={z:+.2f}")
    return ok, "; ".join(details)


def crit06_asymptotic_ratio(seed=DEFAULT_SEED):
    """Exact/asymptotic ratio within 5% at t=1e6 and monotone toward 1."""
    tr = stable_triplet(0.5)
    ratios = [math.exp(log_laplace_xi_rho(tr, 1.0, t)
                       - log_asymptotic_laplace(tr, 0.5, 1.0, t))
              for t in (1e3, 1e4, 1e5, 1e6)]
    gaps = [abs(r - 1.0) for r in ratios]
    ok = gaps[-1] < 0.05 and all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))
    return ok, "ratios " + ", ".join(f"{r:.6f}" for r in ratios)


def crit07_envelope(seed=DEFAULT_SEED):
    """Scaled transform stays below a bounded envelope, no right-end blowup."""
    grid = [10.0 ** k for k in range(7)]
    ok, details = True, []
    for g in (0.5, 1.0):
        rep = uniform_envelope(stable_triplet(g), 1.0, grid, gamma=g)
        fine = rep.bounded and rep.ratios[-1] <= rep.max_ratio
        ok &= fine
        details.append(f"gamma={g}: max {rep.max_ratio:.4f} at t={rep.argmax_t:g}, "
                       f"R(1e6)={rep.ratios[-1]:.4f}")
    return ok, "; ".join(details)


def crit08_slln_clt(seed=DEFAULT_SEED):
    """t^{1/4}(xi_rho(t)/sqrt(t) - sqrt(2)) at t=1e4: mean within 3 SE of 0,
    variance within 5% of 2 sqrt(2)/3."""
    tr = exponential_triplet()
    t = 1e4
    n = 100_000
    xi, _ = sample_xi_rho(tr, [t], n, RngStream(seed, (8,)))
    stat = t ** 0.25 * (xi[:, 0] / math.sqrt(t) - math.sqrt(2.0))
    mean, se = stat.mean(), stat.std() / math.sqrt(n)
    var = stat.var()
    target_var = 2.0 * math.sqrt(2.0) / 3.0
    mean_ok = abs(mean) <= 3.0 * se
    var_ok = abs(var / target_var - 1.0) <= 0.05
    return mean_ok and var_ok, (
        f"mean {mean:+.4f} vs 3SE {3*se:.4f} ({'ok' if mean_ok else 'FAIL'}); "
        f"variance {var:.4f} vs {target_var:.4f} ({'ok' if var_ok else 'FAIL'})")


def crit09_moment_identity(seed=DEFAULT_SEED):
    """Fragmentation MC moment sums vs the transform prediction, 3 SE."""
    nu = binary_uniform(1.0)
    tr = dislocation_to_triplet(nu)
    mv = MeasureV(tr)
    ts, qs, n = [1.0, 5.0, 10.0], [1.0, 2.0], 100_000
    acc = moment_sums_bulk(nu, ts, qs, n, RngStream(seed, (9,)))
    details, ok = [], True
    for j, t in enumerate(ts):
        for iq, q in enumerate(qs):
            v = acc[:, j, iq]
            mc, se = v.mean(), v.std() / math.sqrt(n)
            pred = fragmentation_moment(tr, q, t, measure=mv)
            z = (mc - pred) / se
            ok &= abs(z) <= 3.0
            details.append(f"(q={q:g},t={t:g}) z={z:+.2f}")
    return ok, "; ".join(details)


def crit10_tagged_fragment(seed=DEFAULT_SEED):
    """Size-biased fragment mass vs e^{-xi_rho(t)}: two-sample KS, 0.1%."""
    nu = binary_uniform(1.0)
    tr = dislocation_to_triplet(nu)
    t, n = 5.0, 10_000
    gen = RngStream(seed, (10, 0)).generator()
    masses = np.empty(n)
    for i in range(n):
        st = simulate_fragmentation(nu, t, RngStream(seed, (10, 1, i)))
        masses[i] = size_biased_mass(st, gen)
    xi, _ = sample_xi_rho(tr, [t], n, RngStream(seed, (10, 2)))
    ks = ks_2sample_statistic(masses, np.exp(-xi[:, 0]))
    crit = ks_2sample_critical(n, n, 0.001)
    return ks < crit, f"KS {ks:.5f} vs crit {crit:.5f}"


def crit11_empirical_concentration(seed=DEFAULT_SEED):
    """Expected empirical-measure mass of [1.7, 2.3] at t=400 exceeds 0.9."""
    vals = spine_interval_mass(binary_uniform(1.0), 400.0, 1.7, 2.3, 200,
                               RngStream(seed, (11,)))
    mean, se = vals.mean(), vals.std() / math.sqrt(len(vals))
    return mean > 0.9, f"mean interval mass {mean:.4f} +- {se:.4f} (threshold 0.9)"


def crit12_disk_decay(seed=DEFAULT_SEED):
    """log mean perimeter deficit is linear in sqrt(t) with slope in
    [-3.5, -1] and R^2 >= 0.95 over t in {4, 8, 16, 32, 64}."""
    ts = [4.0, 8.0, 16.0, 32.0, 64.0]
    means, _ = mean_perimeter_deficit(ts, 100, RngStream(seed, (12,)), h=1e-5)
    slope, r2 = decay_shape(ts, means)
    ok = r2 >= 0.95 and -3.5 <= slope <= -1.0
    return ok, (f"slope {slope:.3f} (band [-3.5,-1]), R2 {r2:.4f}, "
                f"deficits {['%.3e' % m for m in means]}")


def crit13_deficit_geometry(seed=DEFAULT_SEED):
    """Hexagon deficit exact; cubic approximation ratio for 1000 gaps."""
    hexagon = HitAngles.from_records(np.zeros(6), np.arange(6) * math.pi / 3.0)
    err_hex = abs(perimeter_deficit(hexagon).perimeter_deficit - (2.0 * math.pi - 6.0))
    k = 1000
    rep = perimeter_deficit(HitAngles.from_records(np.zeros(k),
                                                   np.arange(k) * 2.0 * math.pi / k))
    err_ratio = abs(rep.perimeter_deficit / rep.cubic_perimeter - 1.0)
    ok = err_hex < 1e-12 and err_ratio < 1e-4
    return ok, f"hexagon err {err_hex:.2e} (tol 1e-12); cubic ratio err {err_ratio:.2e} (tol 1e-4)"


def crit14_increment_ratio(seed=DEFAULT_SEED):
    """(Vbar(x+d)-Vbar(x))/(d Lbar(x)) near 1/(1+gamma) at x=1e8, d=1e4."""
    ok, details = True, []
    for g in (0.5, 1.0):
        mv = MeasureV(stable_triplet(g))
        ratio = increment_ratio_check(mv, 1e8, 1e4)
        err = abs(ratio - 1.0 / (1.0 + g))
        ok &= err < 1e-3
        details.append(f"gamma={g}: ratio {ratio:.6f}, err {err:.2e}")
    return ok, "; ".join(details)


@dataclass(frozen=True)
class Criterion:
    cid: int
    name: str
    tier: str
    fn: object


CRITERIA = [
    Criterion(1, "gamma1-exactness", "fast", crit01_gamma1_exact),
    Criterion(2, "bessel-pair-identity", "fast", crit02_bessel_identity),
    Criterion(3, "route-equivalence", "fast", crit03_route_equivalence),
    Criterion(4, "stationarity", "full", crit04_stationarity),
    Criterion(5, "mc-vs-formula", "full", crit05_mc_vs_formula),
    Criterion(6, "asymptotic-ratio", "fast", crit06_asymptotic_ratio),
    Criterion(7, "uniform-envelope", "fast", crit07_envelope),
    Criterion(8, "slln-clt", "full", crit08_slln_clt),
    Criterion(9, "moment-identity", "full", crit09_moment_identity),
    Criterion(10, "tagged-fragment", "full", crit10_tagged_fragment),
    Criterion(11, "empirical-concentration", "full", crit11_empirical_concentration),
    Criterion(12, "disk-decay-shape", "full", crit12_disk_decay),
    Criterion(13, "deficit-geometry", "fast", crit13_deficit_geometry),
    Criterion(14, "increment-asymptotics", "fast", crit14_increment_ratio),
]


def run_suite(tier: str = "fast", seed: int = DEFAULT_SEED, out=print):
    """Run the selected tier; returns the number of failures."""
    failures = 0
    selected = [c for c in CRITERIA if tier == "full" or c.tier == "fast"]
    for c in selected:
        t0 = time.time()
        passed, detail = c.fn(seed=seed)
        status = "PASS" if passed else "FAIL"
        out(f"[{status}] {c.cid:2d} {c.name}: {detail} ({time.time()-t0:.1f}s)")
        failures += 0 if passed else 1
    return failures
