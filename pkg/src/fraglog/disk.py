"""Brownian motion in the unit disk with orthogonal boundary reflection:
boundary-hit angles, convex-hull perimeter/area deficits, and the narrow
-escape survival law that motivates the 1/|log m| split rate.

Discretisation: Euler steps of variance h with a radial fold |B| <- 2 - |B|
past the circle (first-order orthogonal reflection, O(h) weak error).  An
angle counts as a boundary hit when |B| >= 1 - eps_b; near-duplicate hits are
suppressed within a (time, angle) window.  The continuous process has no
discrete hit notion, so the window parameters are part of the configuration.

Deficits are pure functions of the gap lengths l_i between consecutive hit
angles (sum l_i = 2 pi):

    2 pi - P = sum l_i - 2 sin(l_i / 2)          ~  sum l_i^3 / 24
    pi  - A  = sum (l_i - sin l_i) / 2           ~  sum l_i^3 / 12

(the inscribed polygon's perimeter is sum 2 sin(l_i/2) and its area is
sum sin(l_i)/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from ._rng import DISK_BLOCK_PATHS, RngStream
from .stats import linear_fit_r2

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class DiskPathConfig:
    horizon: float = 16.0
    h: float = 1e-5
    eps_b: float | None = None     # default 3 sqrt(h)
    dedup_dt: float | None = None  # default 2 h
    dedup_ang: float | None = None # default sqrt(h)
    stride: int = 0                # trajectory subsample stride (0 = off)

    def resolved(self) -> tuple[float, float, float]:
        eps = 3.0 * math.sqrt(self.h) if self.eps_b is None else self.eps_b
        ddt = 2.0 * self.h if self.dedup_dt is None else self.dedup_dt
        dang = math.sqrt(self.h) if self.dedup_ang is None else self.dedup_ang
        return eps, ddt, dang


@dataclass
class HitAngles:
    """Sorted boundary-hit angles with their hit times (unsorted in time)."""
    angles: np.ndarray
    times: np.ndarray

    @classmethod
    def from_records(cls, times, angles) -> "HitAngles":
        angles = np.asarray(angles, dtype=float)
        times = np.asarray(times, dtype=float)
        order = np.argsort(angles, kind="stable")
        return cls(angles[order], times[order])

    def up_to(self, t: float) -> "HitAngles":
        sel = self.times <= t
        return HitAngles(self.angles[sel], self.times[sel])

    def gaps(self) -> np.ndarray:
        """Gap lengths between consecutive hit angles, non-increasing;
        (2 pi,) when fewer than 2 hits."""
        if len(self.angles) < 2:
            return np.array([TWO_PI])
        d = np.diff(self.angles)
        wrap = self.angles[0] + TWO_PI - self.angles[-1]
        return np.sort(np.concatenate([d, [wrap]]))[::-1]


def simulate_disk_paths(config: DiskPathConfig, n_paths: int, rng: RngStream,
                        block: int = DISK_BLOCK_PATHS):
    """n_paths independent walks; returns (list of HitAngles, traj array or
    None with shape (n_paths, n_saved, 2))."""
    eps, ddt, dang = config.resolved()
    n_steps = int(round(config.horizon / config.h))
    hits_all, trajs = [], []
    start, blk = 0, 0
    while start < n_paths:
        m = min(block, n_paths - start)
        hits, traj = _backend.disk_block(rng.child(blk).bit_generator(), m,
                                         n_steps, config.h, eps, ddt, dang,
                                         config.stride)
        hits_all.extend(HitAngles.from_records(t, a) for t, a in hits)
        if traj is not None:
            trajs.append(traj)
        start += m
        blk += 1
    traj_out = np.concatenate(trajs, axis=0) if trajs else None
    return hits_all, traj_out


def simulate_disk_path(config: DiskPathConfig, rng: RngStream):
    """Single walk: (HitAngles, trajectory or None)."""
    hits, traj = simulate_disk_paths(config, 1, rng)
    return hits[0], (traj[0] if traj is not None else None)


# --------------------------------------------------------------------------
# deficits
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DeficitReport:
    perimeter_deficit: float       # 2 pi - P
    area_deficit: float            # pi - A
    cubic_perimeter: float         # sum l^3 / 24
    cubic_area: float              # sum l^3 / 12


def perimeter_deficit(hits: HitAngles) -> DeficitReport:
    gaps = hits.gaps()
    cube = float(np.sum(gaps**3))
    return DeficitReport(
        perimeter_deficit=float(np.sum(gaps - 2.0 * np.sin(gaps / 2.0))),
        area_deficit=float(np.sum(gaps - np.sin(gaps)) / 2.0),
        cubic_perimeter=cube / 24.0,
        cubic_area=cube / 12.0,
    )


def mean_perimeter_deficit(ts, n_paths: int, rng: RngStream,
                           h: float = 1e-5, config: DiskPathConfig | None = None):
    """Mean (2 pi - P_t) over n_paths at each t in ts (one walk per path to
    max(ts), deficits from hit-time prefixes).  Returns (means, ses)."""
    ts = np.asarray(ts, dtype=float)
    cfg = config or DiskPathConfig(horizon=float(ts.max()), h=h)
    hits_all, _ = simulate_disk_paths(cfg, n_paths, rng)
    vals = np.empty((n_paths, len(ts)))
    for i, hits in enumerate(hits_all):
        for j, t in enumerate(ts):
            vals[i, j] = perimeter_deficit(hits.up_to(t)).perimeter_deficit
    return vals.mean(axis=0), vals.std(axis=0) / math.sqrt(n_paths)


def decay_shape(ts, means) -> tuple[float, float]:
    """(slope, R^2) of log mean-deficit against sqrt(t)."""
    slope, _, r2 = linear_fit_r2(np.sqrt(np.asarray(ts)), np.log(np.asarray(means)))
    return slope, r2


# --------------------------------------------------------------------------
# hull comparison
# --------------------------------------------------------------------------

def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull (counter-clockwise, no repeated endpoint)."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) <= 2:
        return pts

    def half(pp):
        out = []
        for p in pp:
            while len(out) > 1:
                ux, uy = out[-1] - out[-2]
                vx, vy = p - out[-2]
                if ux * vy - uy * vx <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.asarray(lower[:-1] + upper[:-1])


def hull_perimeter(points: np.ndarray) -> float:
    hull = convex_hull(points)
    if len(hull) < 2:
        return 0.0
    d = np.diff(np.vstack([hull, hull[:1]]), axis=0)
    return float(np.sum(np.hypot(d[:, 0], d[:, 1])))


def hull_comparison(trajectory: np.ndarray, hits: HitAngles) -> tuple[float, float]:
    """(P_bar, P): hull perimeter of the sampled trajectory (augmented with
    the recorded boundary contact points, so the chord hull is a subset by
    construction) versus the chord perimeter of the hit angles.  Guarantees
    P <= P_bar <= 2 pi."""
    circle_pts = np.stack([np.cos(hits.angles), np.sin(hits.angles)], axis=1)
    pts = np.vstack([trajectory, circle_pts]) if len(circle_pts) else trajectory
    p_bar = hull_perimeter(pts)
    gaps = hits.gaps()
    p_chord = float(np.sum(2.0 * np.sin(gaps / 2.0)))
    if len(hits.angles) < 2:
        p_chord = 0.0
    return p_bar, p_chord


# --------------------------------------------------------------------------
# narrow escape
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SurvivalCurve:
    t_grid: np.ndarray
    survival: np.ndarray
    fitted_rate: float
    predicted_rate: float
    n_hits: int
    wide_confidence: bool


def narrow_escape_rate(x: float) -> float:
    """1 / (-log(1-x) - log 2 + 1/2): the approximate exponential rate of the
    first entrance time into the cap {z . e0 > x}."""
    return 1.0 / (-math.log1p(-x) - math.log(2.0) + 0.5)


def narrow_escape_tail(x: float, t_grid, n_paths: int, rng: RngStream,
                       h: float = 1e-4, block: int = DISK_BLOCK_PATHS) -> SurvivalCurve:
    """MC survival P(tau_x > t) with tau_x the first time e0 . B > x, plus an
    exponential-rate fit against the predicted narrow-escape rate."""
    if not 0.0 < x < 1.0:
        raise ValueError("target x must lie in (0, 1)")
    t_grid = np.asarray(t_grid, dtype=float)
    max_steps = int(round(float(t_grid.max()) / h))
    times = np.empty(n_paths)
    start, blk = 0, 0
    while start < n_paths:
        m = min(block, n_paths - start)
        times[start:start + m] = _backend.disk_escape_block(
            rng.child(blk).bit_generator(), m, x, h, max_steps)
        start += m
        blk += 1
    surv = np.array([(times > t).mean() for t in t_grid])
    n_hits = int(np.isfinite(times).sum())

    sel = (surv > 0.02) & (surv < 0.9)
    wide = sel.sum() < 3 or n_hits < 50
    if sel.sum() >= 2:
        slope, _, _ = linear_fit_r2(t_grid[sel], np.log(surv[sel]))
        fitted = -slope
    else:
        fitted = math.nan
        wide = True
    return SurvivalCurve(t_grid, surv, fitted, narrow_escape_rate(x), n_hits, wide)
