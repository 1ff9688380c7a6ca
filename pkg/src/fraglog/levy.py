"""Subordinators described by their triplet (killing, drift, jump measure).

The Laplace exponent is
    phi(q) = kappa + c*q + int_0^inf (1 - e^{-q x}) pi(dx),
its primitive Phi(q) = int_0^q phi, and Phi_inverse the functional inverse of
Phi.  Jump measures come in three flavours: a finite-activity measure
``total_rate * law`` for a named jump-size law, the canonical stable family
normalised so that phi(q) = (gamma+1) q^gamma, and a tabulated density with
power-law extrapolation at both ends.

Everything here is a pure function of immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import digamma, gammaln, polygamma

from .errors import EvaluationError, RangeError

_QUAD_OPTS = dict(epsabs=0.0, epsrel=1e-11, limit=300)


def _ein(z: float) -> float:
    """Entire exponential integral Ein(z) = int_0^z (1-e^{-u})/u du."""
    if z < 1e-3:
        # series sum (-1)^{n+1} z^n / (n * n!)
        term = z
        total = z
        for n in range(2, 12):
            term *= -z / n
            total += term / n
        return total
    from scipy.special import exp1
    return 0.5772156649015328606 + math.log(z) + exp1(z)


# --------------------------------------------------------------------------
# jump-size laws (normalised to unit total rate)
# --------------------------------------------------------------------------

class JumpLaw:
    """A positive jump-size law with density, sampler and moments."""

    name = "abstract"

    def phi_unit(self, q: float) -> float:
        """int (1 - e^{-q x}) law(dx)."""
        raise NotImplementedError

    def big_phi_unit(self, q: float) -> float:
        """int_0^q phi_unit(s) ds."""
        raise NotImplementedError

    def laplace(self, q: float) -> float:
        return 1.0 - self.phi_unit(q)

    def mean(self) -> float:
        raise NotImplementedError

    def second_moment(self) -> float:
        raise NotImplementedError

    def sample(self, gen: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class ExponentialLaw(JumpLaw):
    theta: float
    name = "exponential"

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("exponential law needs theta > 0")

    def phi_unit(self, q):
        return q / (q + self.theta)

    def big_phi_unit(self, q):
        z = q / self.theta
        if z < 1e-4:
            # q - theta*log1p(z) cancels catastrophically for tiny z
            return self.theta * z * z * (0.5 - z / 3.0 + z * z / 4.0)
        return q - self.theta * math.log1p(z)

    def mean(self):
        return 1.0 / self.theta

    def second_moment(self):
        return 2.0 / self.theta**2

    def sample(self, gen, n):
        return -np.log1p(-gen.random(n)) / self.theta


@dataclass(frozen=True)
class ConstantLaw(JumpLaw):
    x0: float
    name = "constant"

    def __post_init__(self):
        if self.x0 <= 0:
            raise ValueError("constant law needs x0 > 0")

    def phi_unit(self, q):
        return -math.expm1(-q * self.x0)

    def big_phi_unit(self, q):
        a = q * self.x0
        if a < 1e-4:
            return a * a / self.x0 * (0.5 - a / 6.0 + a * a / 24.0)
        return q + math.expm1(-a) / self.x0

    def mean(self):
        return self.x0

    def second_moment(self):
        return self.x0**2

    def sample(self, gen, n):
        return np.full(n, self.x0)


@dataclass(frozen=True)
class UniformLaw(JumpLaw):
    """Uniform on (0, b)."""
    b: float
    name = "uniform"

    def __post_init__(self):
        if self.b <= 0:
            raise ValueError("uniform law needs b > 0")

    def phi_unit(self, q):
        z = q * self.b
        if z < 1e-8:
            return z / 2.0 - z * z / 6.0
        return 1.0 + math.expm1(-z) / z

    def big_phi_unit(self, q):
        return q - _ein(q * self.b) / self.b

    def mean(self):
        return self.b / 2.0

    def second_moment(self):
        return self.b**2 / 3.0

    def sample(self, gen, n):
        return self.b * gen.random(n)


@dataclass(frozen=True)
class DiscreteLaw(JumpLaw):
    """Finite mixture of atoms; generalises ConstantLaw to several sizes."""
    atoms: tuple
    weights: tuple
    name = "discrete"

    def __post_init__(self):
        if len(self.atoms) != len(self.weights) or not self.atoms:
            raise ValueError("discrete law needs matching non-empty atoms/weights")
        if any(x <= 0 for x in self.atoms) or any(w <= 0 for w in self.weights):
            raise ValueError("discrete law needs positive atoms and weights")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("discrete law weights must sum to 1")

    @staticmethod
    def _one_atom_big_phi(q, x):
        a = q * x
        if a < 1e-4:
            return a * a / x * (0.5 - a / 6.0 + a * a / 24.0)
        return q + math.expm1(-a) / x

    def phi_unit(self, q):
        return sum(w * -math.expm1(-q * x) for x, w in zip(self.atoms, self.weights))

    def big_phi_unit(self, q):
        return sum(w * self._one_atom_big_phi(q, x)
                   for x, w in zip(self.atoms, self.weights))

    def mean(self):
        return sum(w * x for x, w in zip(self.atoms, self.weights))

    def second_moment(self):
        return sum(w * x * x for x, w in zip(self.atoms, self.weights))

    def sample(self, gen, n):
        cum = np.cumsum(self.weights)
        idx = np.searchsorted(cum, gen.random(n) * cum[-1])
        return np.asarray(self.atoms, dtype=float)[np.minimum(idx, len(self.atoms) - 1)]


@dataclass(frozen=True)
class NegLogBetaLaw(JumpLaw):
    """Law of -log(S) with S ~ Beta(2, k-1): the size-biased part of a
    uniform split of the simplex into k pieces.  k = 2 coincides with
    ExponentialLaw(2)."""
    k: int
    name = "neg_log_beta"

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("neg_log_beta law needs k >= 2")

    def laplace(self, q):
        # E[S^q] = Gamma(q+2) Gamma(k+1) / Gamma(q+k+1)
        return math.exp(gammaln(q + 2.0) + gammaln(self.k + 1.0) - gammaln(q + self.k + 1.0))

    def phi_unit(self, q):
        return 1.0 - self.laplace(q)

    def big_phi_unit(self, q):
        val, _ = quad(self.phi_unit, 0.0, q, **_QUAD_OPTS)
        return val

    def mean(self):
        return digamma(self.k + 1.0) - digamma(2.0)

    def second_moment(self):
        mu = self.mean()
        var = polygamma(1, 2.0) - polygamma(1, self.k + 1.0)
        return var + mu * mu

    def sample(self, gen, n):
        return -np.log(gen.beta(2.0, self.k - 1.0, size=n))


# --------------------------------------------------------------------------
# jump measures
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteJump:
    """pi = total_rate * jump_law;  finite activity."""
    total_rate: float
    law: JumpLaw

    def __post_init__(self):
        if self.total_rate <= 0:
            raise ValueError("FiniteJump needs total_rate > 0")

    def phi_jump(self, q: float) -> float:
        return self.total_rate * self.law.phi_unit(q)

    def big_phi_jump(self, q: float) -> float:
        return self.total_rate * self.law.big_phi_unit(q)

    def mass(self) -> float:
        return self.total_rate

    def mean_jump_integral(self) -> float:          # int x pi(dx)
        return self.total_rate * self.law.mean()

    def second_jump_integral(self) -> float:        # int x^2 pi(dx)
        return self.total_rate * self.law.second_moment()

    def inverse_mean_integral(self) -> float:       # int x^{-1} pi(dx)
        law = self.law
        if isinstance(law, ExponentialLaw):
            return math.inf
        if isinstance(law, ConstantLaw):
            return self.total_rate / law.x0
        if isinstance(law, DiscreteLaw):
            return self.total_rate * sum(w / x for x, w in zip(law.atoms, law.weights))
        if isinstance(law, UniformLaw):
            return math.inf
        raise EvaluationError(f"no x^-1 integral for law {law.name}")


@dataclass(frozen=True)
class StableTail:
    """Canonical stable family: phi(q) = (gamma+1) q^gamma for gamma in (0, 1].

    gamma = 1 degenerates to the pure drift xi_t = 2t; for gamma < 1 the jump
    density is (gamma+1)*gamma/Gamma(1-gamma) * x^{-1-gamma} and pi(0,inf) is
    infinite.
    """
    gamma: float

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("StableTail needs gamma in (0, 1]")

    def phi_jump(self, q: float) -> float:
        return (self.gamma + 1.0) * q**self.gamma

    def big_phi_jump(self, q: float) -> float:
        return q ** (self.gamma + 1.0)

    def mass(self) -> float:
        return math.inf if self.gamma < 1.0 else 0.0

    def mean_jump_integral(self) -> float:
        return math.inf if self.gamma < 1.0 else 2.0

    def second_jump_integral(self) -> float:
        return math.inf if self.gamma < 1.0 else 0.0


@dataclass(frozen=True)
class TabulatedDensity:
    """Jump density sampled on a grid over (0, x_max], with power-law
    extrapolation density ~ x^pow0 below the grid and ~ x^pow_inf above."""
    xs: tuple
    dens: tuple
    pow0: float
    pow_inf: float

    def __post_init__(self):
        xs = np.asarray(self.xs, float)
        ds = np.asarray(self.dens, float)
        if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0) or xs[0] <= 0:
            raise EvaluationError("TabulatedDensity needs an increasing positive grid")
        if np.any(ds < 0) or not np.all(np.isfinite(ds)):
            raise EvaluationError("TabulatedDensity needs finite non-negative values")
        if self.pow0 <= -2.0:
            raise EvaluationError("pow0 <= -2 makes int (1^x) pi(dx) diverge at 0")
        if self.pow_inf >= -1.0:
            raise EvaluationError("pow_inf >= -1 makes pi(dx) diverge at infinity")

    def density(self, x: float) -> float:
        xs = np.asarray(self.xs, float)
        ds = np.asarray(self.dens, float)
        if x <= 0:
            return 0.0
        if x < xs[0]:
            return ds[0] * (x / xs[0]) ** self.pow0
        if x > xs[-1]:
            return ds[-1] * (x / xs[-1]) ** self.pow_inf
        return float(np.interp(x, xs, ds))

    def _integrate(self, f) -> float:
        xs = self.xs
        total = 0.0
        val, _ = quad(lambda x: f(x) * self.density(x), 0.0, xs[0], **_QUAD_OPTS)
        total += val
        val, _ = quad(lambda x: f(x) * self.density(x), xs[0], xs[-1],
                      points=list(xs)[1:-1][:40], **_QUAD_OPTS)
        total += val
        val, _ = quad(lambda x: f(x) * self.density(x), xs[-1], np.inf, **_QUAD_OPTS)
        total += val
        if not math.isfinite(total):
            raise EvaluationError("tabulated jump measure integral is not finite")
        return total

    def phi_jump(self, q: float) -> float:
        return self._integrate(lambda x: -math.expm1(-q * x))

    def big_phi_jump(self, q: float) -> float:
        # integrate phi rather than the x-integral: one quadrature kernel
        val, _ = quad(self.phi_jump, 0.0, q, **_QUAD_OPTS)
        return val

    def mass(self) -> float:
        if self.pow0 <= -1.0:
            return math.inf
        return self._integrate(lambda x: 1.0)

    def mean_jump_integral(self) -> float:
        if self.pow_inf >= -2.0:
            return math.inf
        return self._integrate(lambda x: x)

    def second_jump_integral(self) -> float:
        if self.pow_inf >= -3.0:
            return math.inf
        return self._integrate(lambda x: x * x)

    def inverse_mean_integral(self) -> float:
        if self.pow0 <= 0.0:
            return math.inf
        return self._integrate(lambda x: 1.0 / x)


# --------------------------------------------------------------------------
# the triplet
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LevyTriplet:
    """(killing, drift, jumps).  ``asserted_nonlattice`` records the caller's
    assertion that the induced law is strongly non-lattice (needed by the
    large-time formulas); it is never verified numerically."""
    kappa: float = 0.0
    c: float = 0.0
    jumps: FiniteJump | StableTail | TabulatedDensity = None
    asserted_nonlattice: bool = True

    def __post_init__(self):
        if self.kappa < 0 or self.c < 0:
            raise ValueError("kappa and c must be >= 0")
        if self.jumps is None:
            raise ValueError("a jump measure is required (pi(0,inf) > 0)")

    @property
    def is_stable(self) -> bool:
        return isinstance(self.jumps, StableTail)

    def jump_mass(self) -> float:
        return self.jumps.mass()

    def drift_atom(self) -> float:
        """Atom 1{c=0}/(kappa + pi(0,inf)) of the inverse exponent's drift.

        Zero whenever c > 0 or the jump measure is infinite.  The stable
        family always yields 0 (gamma < 1: infinite activity; gamma = 1:
        effective drift 2)."""
        if self.is_stable:
            return 0.0
        if self.c > 0:
            return 0.0
        denom = self.kappa + self.jump_mass()
        return 0.0 if math.isinf(denom) else 1.0 / denom


def eval_phi(triplet: LevyTriplet, q: float) -> float:
    """Laplace exponent phi(q) = kappa + c q + int (1-e^{-qx}) pi(dx)."""
    if q < 0:
        raise ValueError("eval_phi requires q >= 0")
    if q == 0.0:
        return triplet.kappa
    val = triplet.kappa + triplet.c * q + triplet.jumps.phi_jump(q)
    if not math.isfinite(val):
        raise EvaluationError(f"phi({q}) evaluated to {val}")
    return val


def eval_big_phi(triplet: LevyTriplet, q: float) -> float:
    """Primitive Phi(q) = int_0^q phi(s) ds; strictly increasing and convex."""
    if q < 0:
        raise ValueError("eval_big_phi requires q >= 0")
    if q == 0.0:
        return 0.0
    val = (triplet.kappa * q + 0.5 * triplet.c * q * q
           + triplet.jumps.big_phi_jump(q))
    if not math.isfinite(val):
        raise EvaluationError(f"Phi({q}) evaluated to {val}")
    return val


def eval_phi_inverse(triplet: LevyTriplet, y: float, rel_tol: float = 1e-12) -> float:
    """Solve Phi(q) = y by bracketing plus safeguarded Newton.

    Phi is convex, so Newton started at the right bracket end converges
    monotonically; any iterate leaving the bracket falls back to bisection.
    """
    if y < 0:
        raise ValueError("eval_phi_inverse requires y >= 0")
    if y == 0.0:
        return 0.0
    if triplet.is_stable:
        g = triplet.jumps.gamma
        return y ** (1.0 / (g + 1.0))

    lo, hi = 0.0, 1.0
    it = 0
    while eval_big_phi(triplet, hi) < y:
        lo = hi
        hi *= 2.0
        it += 1
        if it > 1000 or not math.isfinite(hi):
            raise RangeError(f"cannot bracket Phi_inverse({y})")

    # residual tolerance per the contract, plus relative convergence in q so
    # the inverse stays accurate where Phi is nearly flat (small q)
    tol = rel_tol * max(1.0, y)
    q = hi
    for _ in range(200):
        f = eval_big_phi(triplet, q) - y
        if f > 0:
            hi = q
        else:
            lo = q
        d = eval_phi(triplet, q)
        step = f / d if d > 0 else math.nan
        q_new = q - step
        if not (lo < q_new < hi) or not math.isfinite(q_new):
            q_new = 0.5 * (lo + hi)
        if abs(f) <= tol and abs(q_new - q) <= 1e-12 * max(q, 1e-300):
            return q_new
        q = q_new
    f = eval_big_phi(triplet, q) - y
    if abs(f) <= tol:
        return q
    raise EvaluationError(f"Phi_inverse({y}) did not converge (residual {f})")


@dataclass(frozen=True)
class Moments:
    m: float          # c + int x pi(dx)
    a: float          # int x^2 pi(dx)
    gamma_est: float  # diagnostic slope of log phi near 0


def moments(triplet: LevyTriplet) -> Moments:
    """First/second jump-integral moments (infinities are legal values) and a
    diagnostic regular-variation index estimate.  gamma_est never gates any
    computation; the caller declares gamma when invoking asymptotics."""
    if triplet.is_stable:
        g = triplet.jumps.gamma
        if g < 1.0:
            return Moments(math.inf, math.inf, g)
        return Moments(2.0, 0.0, 1.0)
    m = triplet.c + triplet.jumps.mean_jump_integral()
    a = triplet.jumps.second_jump_integral()
    qs = np.logspace(-8, -4, 5)
    ph = np.array([eval_phi(triplet, q) for q in qs])
    if np.all(ph > 0):
        slope = np.polyfit(np.log(qs), np.log(ph), 1)[0]
    else:
        slope = math.nan
    return Moments(m, a, float(slope))


# convenience constructors ---------------------------------------------------

def exponential_triplet(rate: float = 1.0, theta: float = 1.0,
                        c: float = 0.0, kappa: float = 0.0) -> LevyTriplet:
    return LevyTriplet(kappa, c, FiniteJump(rate, ExponentialLaw(theta)))


def stable_triplet(gamma: float) -> LevyTriplet:
    return LevyTriplet(0.0, 0.0, StableTail(gamma))


def constant_jump_triplet(rate: float, x0: float,
                          c: float = 0.0, kappa: float = 0.0) -> LevyTriplet:
    return LevyTriplet(kappa, c, FiniteJump(rate, ConstantLaw(x0)))


def uniform_jump_triplet(rate: float, b: float,
                         c: float = 0.0, kappa: float = 0.0) -> LevyTriplet:
    return LevyTriplet(kappa, c, FiniteJump(rate, UniformLaw(b)))
