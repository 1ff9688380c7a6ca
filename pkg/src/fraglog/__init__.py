"""fraglog: time-changed subordinators xi_{rho(t)}, fragmentation processes
with split rate proportional to 1/|log mass|, and the reflected-Brownian
-motion-in-a-disk convex hull model they approximate.

Library layout:

    levy           triplets (kappa, c, pi) and phi / Phi / Phi^{-1}
    measure        Vbar / Lbar of the inverse exponent's Levy measure
    bessel         self-contained K_a and the paired exponential integral
    transform      exact/asymptotic Laplace transforms of xi_{rho(t)}
    simulate       path sampling and exact time-change inversion
    fragmentation  event-driven fragmentation, moments, empirical measures
    disk           reflected Brownian disk walks and hull deficits
    cli            the `fraglog` command (CSV emission, acceptance runner)
"""

__version__ = "0.1.0"

from . import bessel, levy, measure, transform
from ._backend import BACKEND, HAVE_COMPILED
from ._rng import RngStream

__all__ = [
    "BACKEND",
    "HAVE_COMPILED",
    "RngStream",
    "__version__",
    "bessel",
    "levy",
    "measure",
    "transform",
]
