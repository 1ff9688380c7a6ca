"""Fragmentation processes in which a fragment of mass m splits at rate
total_rate / |log m|.

The unit-mass root splits instantly (its rate is infinite), after which every
fragment waits an independent Exponential(rate/|log m|) clock and splits by a
fresh draw from the dislocation law.  Only c = 0 and finite dislocation
measures are simulated; improper (mass-losing) dislocations are supported
analytically through `dislocation_to_triplet`, where the lost mass appears as
an effective killing rate.

The mass of the tagged fragment (a fragment picked proportionally to mass) is
e^{-xi_{rho(t)}} for the subordinator returned by `dislocation_to_triplet`:
that identity drives the moment predictions and the spine estimators here.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from ._rng import RngStream
from .errors import FraglogError, UnsupportedError
from .levy import (ConstantLaw, DiscreteLaw, ExponentialLaw, FiniteJump,
                   LevyTriplet, NegLogBetaLaw, eval_phi_inverse)


class FragmentationOverflowError(FraglogError):
    """Raised when a run exceeds the configured fragment budget; carries the
    partial state for diagnostics."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.partial_state = state


# --------------------------------------------------------------------------
# dislocation measures
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DislocationMeasure:
    """Finite dislocation measure: total rate times a partition sampler.

    kind: "binary_uniform" (s1 = max(U, 1-U)), "deterministic" (a fixed
    vector, possibly improper), or "dirichlet" (uniform split into k parts).
    """
    kind: str
    rate: float = 1.0
    parts: tuple = ()   # deterministic vector, or (k,) for dirichlet

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("dislocation rate must be positive")
        if self.kind == "deterministic":
            v = tuple(sorted((x for x in self.parts if x > 0), reverse=True))
            if not v or sum(v) > 1.0 + 1e-12:
                raise ValueError("deterministic partition must be in S")
            object.__setattr__(self, "parts", v)
        elif self.kind == "dirichlet":
            if len(self.parts) != 1 or int(self.parts[0]) < 2:
                raise ValueError("dirichlet split needs parts=(k,) with k >= 2")
        elif self.kind != "binary_uniform":
            raise ValueError(f"unknown dislocation family {self.kind!r}")

    def split(self, gen: np.random.Generator) -> np.ndarray:
        """One partition, sorted non-increasing."""
        if self.kind == "binary_uniform":
            u = gen.random()
            hi = max(u, 1.0 - u)
            return np.array([hi, 1.0 - hi])
        if self.kind == "deterministic":
            return np.asarray(self.parts)
        k = int(self.parts[0])
        return np.sort(gen.dirichlet(np.ones(k)))[::-1]

    def conserved_mass(self) -> float:
        if self.kind == "deterministic":
            return float(sum(self.parts))
        return 1.0

    def spine_jump(self, gen: np.random.Generator, n: int) -> np.ndarray:
        """-log of the size-biased child mass, for n independent splits."""
        if self.kind == "binary_uniform":
            return -np.log1p(-gen.random(n)) / 2.0
        if self.kind == "deterministic":
            parts = np.asarray(self.parts)
            w = parts / parts.sum()
            idx = gen.choice(len(parts), size=n, p=w)
            return -np.log(parts[idx])
        k = int(self.parts[0])
        return -np.log(gen.beta(2.0, k - 1.0, size=n))


def binary_uniform(rate: float = 1.0) -> DislocationMeasure:
    return DislocationMeasure("binary_uniform", rate)


def deterministic_split(parts, rate: float = 1.0) -> DislocationMeasure:
    return DislocationMeasure("deterministic", rate, tuple(parts))


def dirichlet_split(k: int, rate: float = 1.0) -> DislocationMeasure:
    return DislocationMeasure("dirichlet", rate, (int(k),))


def dislocation_to_triplet(nu: DislocationMeasure, c: float = 0.0) -> LevyTriplet:
    """Triplet of the tagged-fragment subordinator: drift c, jump measure the
    intensity of -log(size-biased child), killing the dислocation's mean lost
    mass.  phi(q) = c q + rate * E[sum_i s_i (1 - s_i^q)] plus the killing.
    """
    if c < 0:
        raise ValueError("erosion must be >= 0")
    if nu.kind == "binary_uniform":
        # size-biased child has density 2s on (0,1): -log is Exponential(2)
        return LevyTriplet(0.0, c, FiniteJump(nu.rate, ExponentialLaw(2.0)))
    if nu.kind == "deterministic":
        parts = np.asarray(nu.parts)
        sigma = parts.sum()
        kappa = nu.rate * (1.0 - sigma)
        atoms = -np.log(parts)
        weights = parts / sigma
        # merge equal atoms
        uniq: dict[float, float] = {}
        for a, w in zip(atoms, weights):
            uniq[a] = uniq.get(a, 0.0) + w
        if len(uniq) == 1:
            law = ConstantLaw(next(iter(uniq)))
        else:
            items = sorted(uniq.items())
            law = DiscreteLaw(tuple(a for a, _ in items), tuple(w for _, w in items))
        return LevyTriplet(max(kappa, 0.0), c, FiniteJump(nu.rate * sigma, law))
    k = int(nu.parts[0])
    return LevyTriplet(0.0, c, FiniteJump(nu.rate, NegLogBetaLaw(k)))


# --------------------------------------------------------------------------
# event-driven simulation
# --------------------------------------------------------------------------

@dataclass
class Fragment:
    ident: int
    mass: float
    birth: float
    next_split: float   # +inf when frozen below the mass floor


@dataclass
class SplitEvent:
    time: float
    parent: int
    parent_mass: float
    parent_birth: float
    children: tuple


@dataclass
class FragmentationState:
    time: float
    fragments: list        # alive Fragment records
    events: list           # SplitEvent log (genealogy)
    parent_of: dict
    n_frozen: int

    def masses(self) -> np.ndarray:
        return np.array([f.mass for f in self.fragments])


def simulate_fragmentation(nu: DislocationMeasure, t_end: float,
                           rng: RngStream, mu_min: float = 1e-12,
                           max_fragments: int = 2_000_000) -> FragmentationState:
    """Exact event-driven simulation up to t_end (c = 0, finite nu).

    Fragments with mass <= mu_min are frozen: their residual split rate
    rate/|log mu_min| makes at most t*rate/|log mu_min| expected further
    splits, so freezing bounds memory at negligible bias.
    """
    if t_end < 0:
        raise ValueError("t_end must be >= 0")
    gen = rng.generator()
    frags: dict[int, Fragment] = {}
    events: list[SplitEvent] = []
    parent_of: dict[int, int] = {}
    heap: list = []
    n_frozen = 0
    next_id = 1

    def clock(mass: float, now: float) -> float:
        if mass <= mu_min:
            return math.inf
        return now + float(-np.log1p(-gen.random())) * (-math.log(mass)) / nu.rate

    def do_split(ident: int, now: float):
        nonlocal next_id, n_frozen
        parent = frags.pop(ident)
        ratios = nu.split(gen)
        kids = []
        for s in ratios:
            if s <= 0.0:
                continue
            m = parent.mass * float(s)
            kid = Fragment(next_id, m, now, clock(m, now))
            if math.isinf(kid.next_split):
                n_frozen += 1
            else:
                heapq.heappush(heap, (kid.next_split, kid.ident))
            frags[kid.ident] = kid
            parent_of[kid.ident] = ident
            kids.append(kid.ident)
            next_id += 1
        events.append(SplitEvent(now, ident, parent.mass, parent.birth, tuple(kids)))
        if len(frags) > max_fragments:
            state = FragmentationState(now, list(frags.values()), events,
                                       parent_of, n_frozen)
            raise FragmentationOverflowError(
                f"fragment budget {max_fragments} exceeded at t={now:.4g}", state)

    frags[0] = Fragment(0, 1.0, 0.0, 0.0)
    do_split(0, 0.0)      # the unit root splits instantly: rate/|log 1| = inf

    while heap:
        t_split, ident = heapq.heappop(heap)
        if t_split > t_end:
            heapq.heappush(heap, (t_split, ident))
            break
        if ident not in frags:
            continue
        do_split(ident, t_split)

    return FragmentationState(t_end, list(frags.values()), events,
                              parent_of, n_frozen)


def moment_sum(state: FragmentationState, q: float) -> float:
    """sum_i m_i^{q+1} over live (and frozen) fragments."""
    m = state.masses()
    return float(np.sum(m ** (q + 1.0)))


def size_biased_mass(state: FragmentationState, gen: np.random.Generator) -> float:
    """Mass of a fragment picked proportionally to mass (the tagged one)."""
    m = state.masses()
    w = m / m.sum()
    return float(m[gen.choice(len(m), p=w)])


def tagged_pair_split_time(state: FragmentationState,
                           gen: np.random.Generator) -> float:
    """Time at which the lines of two independently tagged fragments
    diverged: the split time of their lowest common ancestor.  +inf when both
    tags land in the same fragment (they have not separated by state.time)."""
    m = state.masses()
    w = m / m.sum()
    i, j = gen.choice(len(m), size=2, p=w)
    if i == j:
        return math.inf
    split_time = {ev.parent: ev.time for ev in state.events}
    a = state.fragments[int(i)].ident
    b = state.fragments[int(j)].ident
    anc_a = []
    node = a
    while node in state.parent_of:
        node = state.parent_of[node]
        anc_a.append(node)
    anc_a_set = set(anc_a)
    node = b
    while node not in anc_a_set:
        node = state.parent_of[node]
    return split_time[node]


# --------------------------------------------------------------------------
# empirical measures
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EmpiricalMeasure:
    locations: np.ndarray
    weights: np.ndarray

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def weighted_mean(self) -> float:
        return float(np.average(self.locations, weights=self.weights))

    def weighted_variance(self) -> float:
        mu = self.weighted_mean()
        return float(np.average((self.locations - mu) ** 2, weights=self.weights))

    def mass_in(self, lo: float, hi: float) -> float:
        sel = (self.locations >= lo) & (self.locations <= hi)
        return float(self.weights[sel].sum())


def empirical_measure(state: FragmentationState, nu: DislocationMeasure,
                      c: float = 0.0) -> EmpiricalMeasure:
    """Mass-weighted point measure at locations Phi^{-1}(1/t) |log m_i|."""
    if state.time <= 0:
        raise ValueError("empirical measure needs t > 0")
    triplet = dislocation_to_triplet(nu, c)
    scale = eval_phi_inverse(triplet, 1.0 / state.time)
    m = state.masses()
    return EmpiricalMeasure(scale * np.abs(np.log(m)), m)


def clt_empirical(state: FragmentationState, nu: DislocationMeasure,
                  c: float = 0.0) -> EmpiricalMeasure:
    """Mass-weighted measure of (|log m_i| - sqrt(2 m_bar t)) / t^{1/4},
    whose weighted variance tends to sqrt(2) a / (3 sqrt(m_bar))."""
    from .levy import moments
    triplet = dislocation_to_triplet(nu, c)
    mom = moments(triplet)
    if not (math.isfinite(mom.m) and math.isfinite(mom.a)):
        raise UnsupportedError("clt_empirical requires finite m and a")
    t = state.time
    m = state.masses()
    loc = (np.abs(np.log(m)) - math.sqrt(2.0 * mom.m * t)) / t ** 0.25
    return EmpiricalMeasure(loc, m)


# --------------------------------------------------------------------------
# bulk wave-based samplers (no genealogy; reproducible per seed)
# --------------------------------------------------------------------------

def moment_sums_bulk(nu: DislocationMeasure, ts, qs, n_runs: int,
                     rng: RngStream, mu_min: float = 1e-12,
                     max_frontier: int = 50_000_000) -> np.ndarray:
    """sum_i m_i(t)^{q+1} for every run, t in ts and q in qs, shape
    (n_runs, len(ts), len(qs)).

    Processes the fragment tree in generation waves across all runs at once:
    a fragment born at b with split clock d contributes to every snapshot in
    [b, d), then its children join the next wave.
    """
    gen = rng.generator()
    ts = np.asarray(ts, dtype=float)
    qs = np.asarray(qs, dtype=float)
    t_max = float(ts.max())
    acc = np.zeros((n_runs, len(ts), len(qs)))

    # instant root split
    run = np.arange(n_runs)
    if nu.kind == "binary_uniform":
        u = gen.random(n_runs)
        hi = np.maximum(u, 1.0 - u)
        mass = np.concatenate([hi, 1.0 - hi])
        run = np.concatenate([run, run])
    elif nu.kind == "deterministic":
        parts = np.asarray(nu.parts)
        mass = np.repeat(parts[None, :], n_runs, axis=0).ravel()
        run = np.repeat(run, len(parts))
    else:
        k = int(nu.parts[0])
        mass = np.sort(gen.dirichlet(np.ones(k), size=n_runs), axis=1)[:, ::-1].ravel()
        run = np.repeat(run, k)
    birth = np.zeros_like(mass)

    while mass.size:
        if mass.size > max_frontier:
            raise FragmentationOverflowError(
                f"frontier {mass.size} exceeds budget {max_frontier}")
        frozen = mass <= mu_min
        death = np.full(mass.shape, np.inf)
        live = ~frozen
        if live.any():
            w = -np.log1p(-gen.random(int(live.sum())))
            death[live] = birth[live] + w * (-np.log(mass[live])) / nu.rate
        for j, tj in enumerate(ts):
            sel = (birth <= tj) & (tj < death)
            if sel.any():
                for iq, q in enumerate(qs):
                    np.add.at(acc[:, j, iq], run[sel], mass[sel] ** (q + 1.0))
        split = death <= t_max
        if not split.any():
            break
        m_p, r_p, d_p = mass[split], run[split], death[split]
        n_split = m_p.size
        if nu.kind == "binary_uniform":
            u = gen.random(n_split)
            hi = np.maximum(u, 1.0 - u)
            mass = np.concatenate([m_p * hi, m_p * (1.0 - hi)])
            run = np.concatenate([r_p, r_p])
            birth = np.concatenate([d_p, d_p])
        elif nu.kind == "deterministic":
            parts = np.asarray(nu.parts)
            mass = (m_p[:, None] * parts[None, :]).ravel()
            run = np.repeat(r_p, len(parts))
            birth = np.repeat(d_p, len(parts))
        else:
            k = int(nu.parts[0])
            ratios = np.sort(gen.dirichlet(np.ones(k), size=n_split), axis=1)[:, ::-1]
            mass = (m_p[:, None] * ratios).ravel()
            run = np.repeat(r_p, k)
            birth = np.repeat(d_p, k)
    return acc


def spine_interval_mass(nu: DislocationMeasure, t: float, lo: float, hi: float,
                        n_runs: int, rng: RngStream, t_switch: float | None = None,
                        c: float = 0.0) -> np.ndarray:
    """Per-run unbiased estimates of the expected empirical-measure mass of
    [lo, hi] at time t (locations scaled by Phi^{-1}(1/t)).

    A full tree at large t is out of reach (the fragment count grows like
    e^{|log mass|}), so each run branches exactly up to t_switch and then
    follows one size-biased spine per surviving fragment: by the tagged
    -fragment identity the mass-weighted indicator average is unbiased for
    E[E_t[lo, hi]].
    """
    if c != 0.0:
        raise UnsupportedError("spine estimator is implemented for c = 0")
    triplet = dislocation_to_triplet(nu, c)
    scale = eval_phi_inverse(triplet, 1.0 / t)
    if t_switch is None:
        # aim for ~2000 fragments at the switch: |log m| ~ sqrt(2 m_bar t0)
        from .levy import moments
        mbar = moments(triplet).m
        t_switch = min(t, math.log(2000.0) ** 2 / (2.0 * mbar))
    out = np.empty(n_runs)
    for i in range(n_runs):
        state = simulate_fragmentation(nu, t_switch, rng.child(i))
        gen = rng.child(i, 1 << 20).generator()
        x = np.array([-math.log(f.mass) for f in state.fragments])
        wts = np.array([f.mass for f in state.fragments])
        clockv = np.array([f.next_split for f in state.fragments])
        active = clockv <= t
        # frozen or slow fragments keep their mass to time t unchanged
        while active.any():
            idx = np.nonzero(active)[0]
            x[idx] += nu.spine_jump(gen, len(idx))
            w = -np.log1p(-gen.random(len(idx)))
            clockv[idx] += w * x[idx] / nu.rate
            active[idx] = clockv[idx] <= t
        loc = scale * x
        out[i] = float(wts[(loc >= lo) & (loc <= hi)].sum())
    return out
