"""Benchmark of the compiled kernels against the pure NumPy fallback.

Run as `python -m fraglog.bench` or `fraglog bench`.  The kernels consume
identical random streams, so the timing comparison is apples to apples.
The disk walker is the hot loop that motivates the compiled core (long
sequential dependence, narrow vectors); the wide-vector subordinator
samplers are already near-optimal in NumPy and the fallback is competitive
there.
"""

from __future__ import annotations

import time

from ._backend import compiled, pure
from ._rng import RngStream

CASES = [
    ("finite_jump 2e5 paths, t<=20", "finite_jump_block",
     dict(n_paths=200_000, ts_in=[1.0, 5.0, 20.0], lam=1.0, c=0.0, kappa=0.0,
          law_code=0, p1=1.0)),
    ("stable skeleton 2e4 paths", "stable_block",
     dict(n_paths=20_000, ts_in=[1.0], gamma=0.5)),
    ("disk walk 32 paths x 2e5 steps", "disk_block",
     dict(n_paths=32, n_steps=200_000, h=1e-5, eps_b=3.0 * 1e-5 ** 0.5,
          dedup_dt=2e-5, dedup_ang=1e-5 ** 0.5)),
    ("disk escape 256 paths", "disk_escape_block",
     dict(n_paths=256, x_target=0.9, h=1e-4, max_steps=100_000)),
]


def _time(fn, kwargs) -> float:
    bg = RngStream(1234).child(0).bit_generator()
    t0 = time.perf_counter()
    fn(bg, **kwargs)
    return time.perf_counter() - t0


def run_benchmark(out=print):
    comp = compiled()
    pur = pure()
    if comp is None:
        out("compiled kernels unavailable; timing the pure fallback only")
    out(f"{'case':<36} {'pure':>8} {'compiled':>9} {'speedup':>8}")
    for label, name, kwargs in CASES:
        tp = _time(getattr(pur, name), dict(kwargs))
        if comp is not None:
            tc = _time(getattr(comp, name), dict(kwargs))
            out(f"{label:<36} {tp:>7.2f}s {tc:>8.2f}s {tp / tc:>7.1f}x")
        else:
            out(f"{label:<36} {tp:>7.2f}s {'-':>9} {'-':>8}")


if __name__ == "__main__":
    run_benchmark()
