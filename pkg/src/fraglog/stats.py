"""Small statistical helpers used by tests and the acceptance runner."""

from __future__ import annotations

import math

import numpy as np


def ks_2sample_statistic(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup_x |F_a - F_b|."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    allv = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, allv, side="right") / len(a)
    cdf_b = np.searchsorted(b, allv, side="right") / len(b)
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_2sample_critical(n: int, m: int, alpha: float) -> float:
    """Asymptotic two-sample critical value at level alpha."""
    c = math.sqrt(-math.log(alpha / 2.0) / 2.0)
    return c * math.sqrt((n + m) / (n * m))


def ks_exponential_statistic(x, rate: float = 1.0) -> float:
    """One-sample KS distance of x from Exponential(rate)."""
    x = np.sort(np.asarray(x, dtype=float))
    n = len(x)
    cdf = -np.expm1(-rate * x)
    emp_hi = np.arange(1, n + 1) / n
    emp_lo = np.arange(0, n) / n
    return float(max(np.max(emp_hi - cdf), np.max(cdf - emp_lo)))


def ks_1sample_critical(n: int, alpha: float) -> float:
    c = math.sqrt(-math.log(alpha / 2.0) / 2.0)
    return c / math.sqrt(n)


def linear_fit_r2(x, y) -> tuple[float, float, float]:
    """(slope, intercept, R^2) of the least-squares line y ~ a x + b."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def chi2_uniform_pvalue(values, n_bins: int, hi: float) -> float:
    """Chi-square goodness-of-fit p-value for uniformity on [0, hi)."""
    from scipy.stats import chi2
    counts, _ = np.histogram(np.asarray(values), bins=n_bins, range=(0.0, hi))
    expected = len(values) / n_bins
    stat = float(np.sum((counts - expected) ** 2) / expected)
    return float(chi2.sf(stat, n_bins - 1))
