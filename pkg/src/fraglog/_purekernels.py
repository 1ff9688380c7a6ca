"""Pure NumPy implementations of the hot sampling kernels.

These are the reference semantics for the compiled versions in _kernels.pyx:
both consume the underlying bit stream in exactly the same order (column
major: at each event round, first the full block of waiting times across
active paths in index order, then the full block of jump sizes, etc.), so the
two backends are statistically interchangeable and individually bit
deterministic.  Floating-point results can differ in the last ulp between
backends because NumPy's vectorised transcendentals and libm may round
differently.

Jump-size law codes: 0 exponential(p1), 1 constant(p1), 2 uniform(0,p1),
3 discrete(atoms, cum_weights).
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "pure"


def _gen(bitgen) -> np.random.Generator:
    return np.random.Generator(bitgen)


def _sample_jumps(g, law_code: int, p1: float, atoms, cumw, m: int):
    if law_code == 0:
        return -np.log1p(-g.random(m)) / p1
    if law_code == 1:
        return np.full(m, p1)
    if law_code == 2:
        return p1 * g.random(m)
    if law_code == 3:
        idx = np.searchsorted(cumw, g.random(m), side="right")
        return atoms[np.minimum(idx, len(atoms) - 1)]
    raise ValueError(f"unknown jump law code {law_code}")


def finite_jump_block(bitgen, n_paths: int, ts_in, lam: float, c: float,
                      kappa: float, law_code: int, p1: float,
                      atoms=None, cumw=None):
    """xi_{rho(t)} and rho(t) for each t in the sorted array ts, for a
    finite-activity subordinator (drift c, killing kappa, jump rate lam).

    Returns (xi_out, rho_out) of shape (n_paths, len(ts)); both are +inf for
    targets not reached before the killing epoch.
    """
    g = _gen(bitgen)
    ts = np.asarray(ts_in, dtype=float)
    nt = len(ts)
    xi_out = np.full((n_paths, nt), np.inf)
    rho_out = np.full((n_paths, nt), np.inf)

    s = np.zeros(n_paths)
    xi = np.zeros(n_paths)
    A = np.zeros(n_paths)
    jnext = np.zeros(n_paths, dtype=np.int64)

    if kappa > 0.0:
        e_kill = -np.log1p(-g.random(n_paths)) / kappa
    else:
        e_kill = np.full(n_paths, np.inf)

    active = np.arange(n_paths)
    while active.size:
        m = active.size
        w = -np.log1p(-g.random(m)) / lam
        J = _sample_jumps(g, law_code, p1, atoms, cumw, m)

        sa = s[active]
        seg = w.copy()
        killed = sa + w > e_kill[active]
        seg[killed] = e_kill[active][killed] - sa[killed]

        xa = xi[active]
        A_end = A[active] + xa * seg + 0.5 * c * seg * seg

        # resolve every target that falls inside this segment
        while True:
            ja = np.minimum(jnext[active], nt - 1)
            in_seg = (jnext[active] < nt) & (ts[ja] <= A_end)
            if not in_seg.any():
                break
            idx = active[in_seg]
            tj = ts[jnext[idx]]
            rem = tj - A[idx]
            xij = xi[idx]
            if c > 0.0:
                delta = (np.sqrt(xij * xij + 2.0 * c * rem) - xij) / c
            else:
                delta = rem / xij
            xi_out[idx, jnext[idx]] = xij + c * delta
            rho_out[idx, jnext[idx]] = s[idx] + delta
            jnext[idx] += 1

        # advance the state past the segment
        alive = ~killed
        ia = active[alive]
        s[ia] += w[alive]
        A[ia] = A_end[alive]
        xi[ia] += J[alive]
        # killed paths keep +inf for their remaining targets
        jnext[active[killed]] = nt
        active = active[alive & (jnext[active] < nt)]
    return xi_out, rho_out


def _kanter(gamma: float, u1, u2):
    """Positive stable S with E[e^{-qS}] = e^{-q^gamma} from two uniforms."""
    u1 = np.maximum(u1, 2.0 ** -53)
    U = np.pi * u1
    E = -np.log1p(-u2)
    A = (np.sin(gamma * U) ** gamma * np.sin((1.0 - gamma) * U) ** (1.0 - gamma)
         / np.sin(U)) ** (1.0 / (1.0 - gamma))
    return (A / E) ** ((1.0 - gamma) / gamma)


def stable_block(bitgen, n_paths: int, ts_in, gamma: float,
                 cap_frac: float = 1.0 / 256.0, half: float = 0.5,
                 stop_rel: float = 1e-10):
    """xi_{rho(t)} and rho(t) for the canonical gamma-stable subordinator,
    gamma in (0,1), via an adaptive forward skeleton of exact increments.

    Steps are capped at cap_frac * t^{gamma/(gamma+1)} (the natural rho
    scale) and shrink geometrically near each crossing until the remaining
    running-integral gap falls below stop_rel * t.
    """
    g = _gen(bitgen)
    ts = np.asarray(ts_in, dtype=float)
    nt = len(ts)
    inv_g = 1.0 / gamma
    caps = cap_frac * ts ** (gamma / (gamma + 1.0))

    xi_out = np.empty((n_paths, nt))
    rho_out = np.empty((n_paths, nt))
    s = np.zeros(n_paths)
    xi = np.zeros(n_paths)
    A = np.zeros(n_paths)
    jnext = np.zeros(n_paths, dtype=np.int64)

    active = np.arange(n_paths)
    while active.size:
        # record every crossing whose remaining sliver is negligible
        while True:
            tj = ts[jnext[active]]
            done = (tj - A[active]) <= stop_rel * tj
            if not done.any():
                break
            idx = active[done]
            jj = jnext[idx]
            xi_out[idx, jj] = xi[idx]
            rho_out[idx, jj] = s[idx] + (ts[jj] - A[idx]) / xi[idx]
            jnext[idx] += 1
            active = active[jnext[active] < nt]
            if active.size == 0:
                return xi_out, rho_out

        m = active.size
        xa = xi[active]
        tj = ts[jnext[active]]
        r = tj - A[active]
        cap = caps[jnext[active]]
        dt = np.where(xa > 0.0, np.minimum(cap, half * r / np.where(xa > 0.0, xa, 1.0)), cap)

        u = g.random(2 * m)
        S = _kanter(gamma, u[0::2], u[1::2])
        A[active] += xa * dt
        s[active] += dt
        xi[active] = xa + ((gamma + 1.0) * dt) ** inv_g * S
    return xi_out, rho_out


def disk_block(bitgen, n_paths: int, n_steps: int, h: float, eps_b: float,
               dedup_dt: float, dedup_ang: float, stride: int = 0):
    """Reflected Brownian walks in the unit disk from the origin.

    Euler step B += sqrt(h) N(0, I2) with radial fold |B| <- 2 - |B| past the
    boundary.  An angle is recorded whenever |B| >= 1 - eps_b, unless within
    dedup_dt in time AND dedup_ang in angle of the previous record.

    Returns (hits, traj): hits is a list of (times, angles) arrays per path;
    traj is (n_paths, n_saved, 2) of positions every `stride` steps (starting
    at step 0), or None when stride == 0.
    """
    g = _gen(bitgen)
    sqh = math.sqrt(h)
    bx = np.zeros(n_paths)
    by = np.zeros(n_paths)
    last_t = np.full(n_paths, -np.inf)
    last_a = np.zeros(n_paths)
    ht = [[] for _ in range(n_paths)]
    ha = [[] for _ in range(n_paths)]
    traj = [] if stride else None
    if stride:
        traj.append(np.stack([bx, by], axis=1).copy())

    two_pi = 2.0 * math.pi
    for step in range(1, n_steps + 1):
        u = g.random(2 * n_paths)
        u1 = np.maximum(u[0::2], 2.0 ** -53)
        u2 = u[1::2]
        rad = np.sqrt(-2.0 * np.log(u1))
        bx = bx + sqh * rad * np.cos(two_pi * u2)
        by = by + sqh * rad * np.sin(two_pi * u2)
        r = np.hypot(bx, by)
        over = r > 1.0
        if over.any():
            scale = (2.0 - r[over]) / r[over]
            bx[over] *= scale
            by[over] *= scale
            r[over] = 2.0 - r[over]
        near = r >= 1.0 - eps_b
        if near.any():
            t_now = step * h
            for p in np.nonzero(near)[0]:
                ang = math.atan2(by[p], bx[p]) % two_pi
                d = abs(ang - last_a[p])
                d = min(d, two_pi - d)
                if (t_now - last_t[p] > dedup_dt) or (d >= dedup_ang):
                    ht[p].append(t_now)
                    ha[p].append(ang)
                    last_t[p] = t_now
                    last_a[p] = ang
        if stride and step % stride == 0:
            traj.append(np.stack([bx, by], axis=1).copy())

    hits = [(np.asarray(ht[p]), np.asarray(ha[p])) for p in range(n_paths)]
    traj_arr = np.transpose(np.asarray(traj), (1, 0, 2)) if stride else None
    return hits, traj_arr


def disk_escape_block(bitgen, n_paths: int, x_target: float, h: float,
                      max_steps: int):
    """First time the walk's e0 projection exceeds x_target; +inf if not
    reached within max_steps."""
    g = _gen(bitgen)
    sqh = math.sqrt(h)
    bx = np.zeros(n_paths)
    by = np.zeros(n_paths)
    out = np.full(n_paths, np.inf)
    active = np.arange(n_paths)
    two_pi = 2.0 * math.pi
    for step in range(1, max_steps + 1):
        m = active.size
        if m == 0:
            break
        u = g.random(2 * m)
        u1 = np.maximum(u[0::2], 2.0 ** -53)
        u2 = u[1::2]
        rad = np.sqrt(-2.0 * np.log(u1))
        bx[active] += sqh * rad * np.cos(two_pi * u2)
        by[active] += sqh * rad * np.sin(two_pi * u2)
        r = np.hypot(bx[active], by[active])
        over = r > 1.0
        if over.any():
            io = active[over]
            scale = (2.0 - r[over]) / r[over]
            bx[io] *= scale
            by[io] *= scale
        crossed = bx[active] > x_target
        if crossed.any():
            out[active[crossed]] = step * h
            active = active[~crossed]
    return out
