# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot-loop kernels.

Mirrors fraglog._purekernels function by function: same bit-stream
consumption order (column major over event rounds), same algorithms, same
return shapes.  See that module for the documented reference semantics.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport (M_PI, atan2, cos, exp, fabs, hypot, log, log1p, pow,
                        sin, sqrt)
from numpy.random cimport bitgen_t

cnp.import_array()

BACKEND = "compiled"

cdef double TINY_U = 2.0 ** -53


cdef inline double _u(bitgen_t *bg) noexcept nogil:
    return bg.next_double(bg.state)


def finite_jump_block(object bitgen, Py_ssize_t n_paths, object ts_in,
                      double lam, double c, double kappa, int law_code,
                      double p1, object atoms=None, object cumw=None):
    capsule = bitgen.capsule
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    cdef cnp.ndarray[cnp.float64_t, ndim=1] ts = np.ascontiguousarray(ts_in, dtype=np.float64)
    cdef Py_ssize_t nt = ts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xi_out = np.full((n_paths, nt), np.inf)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rho_out = np.full((n_paths, nt), np.inf)

    cdef cnp.ndarray[cnp.float64_t, ndim=1] s = np.zeros(n_paths)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xi = np.zeros(n_paths)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] A = np.zeros(n_paths)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] jnext = np.zeros(n_paths, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] e_kill = np.full(n_paths, np.inf)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] active = np.arange(n_paths, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.empty(n_paths)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] J = np.empty(n_paths)

    cdef cnp.ndarray[cnp.float64_t, ndim=1] atom_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cumw_arr
    cdef Py_ssize_t n_atoms = 0
    if law_code == 3:
        atom_arr = np.ascontiguousarray(atoms, dtype=np.float64)
        cumw_arr = np.ascontiguousarray(cumw, dtype=np.float64)
        n_atoms = atom_arr.shape[0]
    else:
        atom_arr = np.empty(0)
        cumw_arr = np.empty(0)

    cdef Py_ssize_t m, i, k, p, keep
    cdef double seg, A_end, xij, rem, delta, uu, tj
    cdef bint killed

    if kappa > 0.0:
        for p in range(n_paths):
            e_kill[p] = -log1p(-_u(bg)) / kappa

    m = n_paths
    while m > 0:
        # waiting-time block, then jump-size block (column-major order)
        for i in range(m):
            w[i] = -log1p(-_u(bg)) / lam
        if law_code == 0:
            for i in range(m):
                J[i] = -log1p(-_u(bg)) / p1
        elif law_code == 1:
            for i in range(m):
                J[i] = p1
        elif law_code == 2:
            for i in range(m):
                J[i] = p1 * _u(bg)
        elif law_code == 3:
            for i in range(m):
                uu = _u(bg)
                k = 0
                while k < n_atoms - 1 and cumw_arr[k] <= uu:
                    k += 1
                J[i] = atom_arr[k]
        else:
            raise ValueError(f"unknown jump law code {law_code}")

        keep = 0
        for i in range(m):
            p = active[i]
            seg = w[i]
            killed = s[p] + seg > e_kill[p]
            if killed:
                seg = e_kill[p] - s[p]
            xij = xi[p]
            A_end = A[p] + xij * seg + 0.5 * c * seg * seg
            while jnext[p] < nt and ts[jnext[p]] <= A_end:
                tj = ts[jnext[p]]
                rem = tj - A[p]
                if c > 0.0:
                    delta = (sqrt(xij * xij + 2.0 * c * rem) - xij) / c
                else:
                    delta = rem / xij
                xi_out[p, jnext[p]] = xij + c * delta
                rho_out[p, jnext[p]] = s[p] + delta
                jnext[p] += 1
            if killed:
                jnext[p] = nt
            else:
                s[p] += w[i]
                A[p] = A_end
                xi[p] += J[i]
                if jnext[p] < nt:
                    active[keep] = p
                    keep += 1
        m = keep
    return xi_out, rho_out


cdef inline double _kanter_one(double gamma, double u1, double u2) noexcept nogil:
    cdef double U, E, Azol
    if u1 < TINY_U:
        u1 = TINY_U
    U = M_PI * u1
    E = -log1p(-u2)
    Azol = pow(pow(sin(gamma * U), gamma) * pow(sin((1.0 - gamma) * U), 1.0 - gamma)
               / sin(U), 1.0 / (1.0 - gamma))
    return pow(Azol / E, (1.0 - gamma) / gamma)


def stable_block(object bitgen, Py_ssize_t n_paths, object ts_in, double gamma,
                 double cap_frac=1.0 / 256.0, double half=0.5,
                 double stop_rel=1e-10):
    capsule = bitgen.capsule
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    cdef cnp.ndarray[cnp.float64_t, ndim=1] ts = np.ascontiguousarray(ts_in, dtype=np.float64)
    cdef Py_ssize_t nt = ts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] caps = cap_frac * ts ** (gamma / (gamma + 1.0))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xi_out = np.empty((n_paths, nt))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rho_out = np.empty((n_paths, nt))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s = np.zeros(n_paths)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xi = np.zeros(n_paths)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] A = np.zeros(n_paths)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] jnext = np.zeros(n_paths, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] active = np.arange(n_paths, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dts = np.empty(n_paths)

    cdef double inv_g = 1.0 / gamma
    cdef Py_ssize_t m = n_paths, keep, i, p
    cdef double tj, r, dt, u1, u2

    while m > 0:
        # record matured crossings (loop: several targets may mature at once)
        keep = 0
        for i in range(m):
            p = active[i]
            while jnext[p] < nt:
                tj = ts[jnext[p]]
                if tj - A[p] <= stop_rel * tj:
                    xi_out[p, jnext[p]] = xi[p]
                    rho_out[p, jnext[p]] = s[p] + (tj - A[p]) / xi[p]
                    jnext[p] += 1
                else:
                    break
            if jnext[p] < nt:
                active[keep] = p
                keep += 1
        m = keep
        if m == 0:
            break

        for i in range(m):
            p = active[i]
            tj = ts[jnext[p]]
            r = tj - A[p]
            if xi[p] > 0.0:
                dt = half * r / xi[p]
                if dt > caps[jnext[p]]:
                    dt = caps[jnext[p]]
            else:
                dt = caps[jnext[p]]
            dts[i] = dt
        for i in range(m):
            p = active[i]
            u1 = _u(bg)
            u2 = _u(bg)
            dt = dts[i]
            A[p] += xi[p] * dt
            s[p] += dt
            xi[p] += pow((gamma + 1.0) * dt, inv_g) * _kanter_one(gamma, u1, u2)
    return xi_out, rho_out


def disk_block(object bitgen, Py_ssize_t n_paths, Py_ssize_t n_steps, double h,
               double eps_b, double dedup_dt, double dedup_ang,
               Py_ssize_t stride=0):
    capsule = bitgen.capsule
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    cdef cnp.ndarray[cnp.float64_t, ndim=1] bx = np.zeros(n_paths)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] by = np.zeros(n_paths)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] last_t = np.full(n_paths, -np.inf)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] last_a = np.zeros(n_paths)
    ht = [[] for _ in range(n_paths)]
    ha = [[] for _ in range(n_paths)]
    traj = [] if stride else None
    if stride:
        traj.append(np.stack([bx, by], axis=1).copy())

    cdef double sqh = sqrt(h)
    cdef double two_pi = 2.0 * M_PI
    cdef double band = 1.0 - eps_b
    cdef Py_ssize_t step, p
    cdef double u1, u2, rad, r, scale, ang, d, t_now

    for step in range(1, n_steps + 1):
        t_now = step * h
        for p in range(n_paths):
            u1 = _u(bg)
            u2 = _u(bg)
            if u1 < TINY_U:
                u1 = TINY_U
            rad = sqrt(-2.0 * log(u1))
            bx[p] = bx[p] + sqh * rad * cos(two_pi * u2)
            by[p] = by[p] + sqh * rad * sin(two_pi * u2)
            r = hypot(bx[p], by[p])
            if r > 1.0:
                scale = (2.0 - r) / r
                bx[p] *= scale
                by[p] *= scale
                r = 2.0 - r
            if r >= band:
                ang = atan2(by[p], bx[p])
                if ang < 0.0:
                    ang += two_pi
                d = fabs(ang - last_a[p])
                if d > two_pi - d:
                    d = two_pi - d
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


def disk_escape_block(object bitgen, Py_ssize_t n_paths, double x_target,
                      double h, Py_ssize_t max_steps):
    capsule = bitgen.capsule
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    cdef cnp.ndarray[cnp.float64_t, ndim=1] bx = np.zeros(n_paths)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] by = np.zeros(n_paths)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.full(n_paths, np.inf)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] active = np.arange(n_paths, dtype=np.int64)

    cdef double sqh = sqrt(h)
    cdef double two_pi = 2.0 * M_PI
    cdef Py_ssize_t step, m = n_paths, keep, i, p
    cdef double u1, u2, rad, r, scale

    for step in range(1, max_steps + 1):
        if m == 0:
            break
        keep = 0
        for i in range(m):
            p = active[i]
            u1 = _u(bg)
            u2 = _u(bg)
            if u1 < TINY_U:
                u1 = TINY_U
            rad = sqrt(-2.0 * log(u1))
            bx[p] = bx[p] + sqh * rad * cos(two_pi * u2)
            by[p] = by[p] + sqh * rad * sin(two_pi * u2)
            r = hypot(bx[p], by[p])
            if r > 1.0:
                scale = (2.0 - r) / r
                bx[p] *= scale
                by[p] *= scale
            if bx[p] > x_target:
                out[p] = step * h
            else:
                active[keep] = p
                keep += 1
        m = keep
    return out
