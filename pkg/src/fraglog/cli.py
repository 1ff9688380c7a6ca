"""The fraglog command line.

Subcommands: laplace, asymptotic, dgamma, measure, simulate, fragsim, disk,
verify, bench.  Every run is fully determined by its configuration and seed:
output CSV is byte-identical across invocations (no timestamps), comment
lines record the package version, the seed, and the formula each column
instantiates.  Flat key=value config files (INI, one [run] section) supply
defaults; explicit flags override them.

Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 acceptance
failure.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from ._backend import BACKEND
from ._rng import BLOCK_PATHS, DISK_BLOCK_PATHS, RngStream
from .errors import FraglogError
from .fragmentation import (DislocationMeasure, binary_uniform,
                            deterministic_split, dirichlet_split,
                            dislocation_to_triplet, empirical_measure,
                            simulate_fragmentation)
from .levy import (LevyTriplet, constant_jump_triplet, exponential_triplet,
                   stable_triplet, uniform_jump_triplet)
from .measure import MeasureV
from .simulate import sample_xi_rho
from .transform import (asymptotic_laplace, d_gamma_laplace, laplace_xi_rho,
                        laplace_xi_rho_gaussian_form)

FORMULAS = {
    "exact": "phi(q) * int exp(-Phi(q)x - t/x) x L(dx)",
    "gaussian_form": "phi(q) e^{-2 sqrt(Phi(q)t)} int 2u e^{-u^2} (Vbar(a+b)-Vbar(a-b)) du",
    "asymptotic": "b(q) t^{1/4} Phi_inv(t^{-1/2}) e^{-2 sqrt(Phi(q)t)}",
    "dgamma": "(2/Gamma(g/(g+1))) lam^{g/2} K_{g/(g+1)}(2 lam^{(g+1)/2})",
    "v_bar": "Vbar(x) = V([0,x]) with V(dx) = x L(dx)",
    "l_bar": "Lbar(x) = L(x, inf)",
    "xi": "xi_{rho(t)}, rho(t) = inf{u : int_0^u xi > t}",
    "moment": "sum_i m_i(t)^{q+1} = E e^{-q xi_rho(t)}",
    "location": "Phi_inv(1/t) |log m_i|, weight m_i",
    "perimeter_deficit": "2pi - P = sum l_i - 2 sin(l_i/2)",
    "area_deficit": "pi - A = sum (l_i - sin l_i)/2",
    "cubic": "sum l_i^3 / 24 (perimeter), / 12 (area)",
    "survival": "P(tau_x > t), tau_x = first time e0.B > x",
    "predicted_rate": "1 / (-log(1-x) - log 2 + 1/2)",
}


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.14e}"
    return str(x)


def emit_csv(out, comments, header, rows):
    close = False
    if isinstance(out, str) and out != "-":
        out = open(out, "w")
        close = True
    elif out == "-" or out is None:
        out = sys.stdout
    try:
        out.write(f"# fraglog {__version__} backend={BACKEND}\n")
        for c in comments:
            out.write(f"# {c}\n")
        out.write(",".join(header) + "\n")
        for row in rows:
            out.write(",".join(_fmt(v) for v in row) + "\n")
    finally:
        if close:
            out.close()


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Everything that determines a run (plus the build version)."""
    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    jobs: int = 1
    output: str = "-"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(**d)


def _parse_floats(text: str) -> list:
    return [float(x) for x in str(text).replace(";", ",").split(",") if x != ""]


def make_triplet(ns) -> LevyTriplet:
    fam = ns.family
    if fam == "stable":
        return stable_triplet(ns.gamma)
    if fam == "exponential":
        return exponential_triplet(ns.rate, ns.theta, ns.c, ns.kappa)
    if fam == "constant":
        return constant_jump_triplet(ns.rate, ns.x0, ns.c, ns.kappa)
    if fam == "uniform":
        return uniform_jump_triplet(ns.rate, ns.b, ns.c, ns.kappa)
    raise FraglogError(f"unknown family {fam!r}")


def make_dislocation(ns) -> DislocationMeasure:
    kind = ns.dislocation.replace("-", "_")
    if kind == "binary_uniform":
        return binary_uniform(ns.rate)
    if kind == "deterministic":
        return deterministic_split(_parse_floats(ns.parts), ns.rate)
    if kind == "dirichlet":
        return dirichlet_split(ns.k, ns.rate)
    raise FraglogError(f"unknown dislocation family {ns.dislocation!r}")


def _add_triplet_args(p):
    p.add_argument("--family", default="stable",
                   choices=["stable", "exponential", "constant", "uniform"])
    p.add_argument("--gamma", type=float, default=1.0, help="stable index in (0,1]")
    p.add_argument("--rate", type=float, default=1.0, help="total jump rate")
    p.add_argument("--theta", type=float, default=1.0, help="exponential jump-law rate")
    p.add_argument("--x0", type=float, default=1.0, help="constant jump size")
    p.add_argument("--b", type=float, default=1.0, help="uniform jump-law upper end")
    p.add_argument("--c", type=float, default=0.0, help="drift")
    p.add_argument("--kappa", type=float, default=0.0, help="killing rate")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fraglog", description=__doc__)
    ap.add_argument("--config", help="INI file with a [run] section of defaults")
    sub = ap.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--out", default="-", help="output CSV path ('-' = stdout)")

    p = sub.add_parser("laplace", help="exact transform of xi_rho(t)")
    _add_triplet_args(p)
    p.add_argument("--q", default="1.0")
    p.add_argument("--t", default="1.0")
    p.add_argument("--gamma-index", type=float, default=None,
                   help="declared regular-variation index for the asymptotic column")
    common(p)

    p = sub.add_parser("asymptotic", help="large-time asymptotic form")
    _add_triplet_args(p)
    p.add_argument("--q", default="1.0")
    p.add_argument("--t", default="1.0")
    p.add_argument("--gamma-index", type=float, default=None)
    common(p)

    p = sub.add_parser("dgamma", help="transform of the stationary scaled law")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--lambda", dest="lam", default="1.0")
    common(p)

    p = sub.add_parser("measure", help="Vbar and Lbar of the inverse exponent")
    _add_triplet_args(p)
    p.add_argument("--x", default="1.0")
    p.add_argument("--mode", default="auto", choices=["auto", "stable", "numeric"])
    common(p)

    p = sub.add_parser("simulate", help="Monte Carlo of xi_rho(t)")
    _add_triplet_args(p)
    p.add_argument("--q", default="1.0")
    p.add_argument("--t", default="1.0")
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument("--emit", default="summary", choices=["summary", "samples"])
    common(p)

    p = sub.add_parser("fragsim", help="fragmentation simulation")
    p.add_argument("--dislocation", default="binary-uniform")
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--parts", default="0.5,0.5")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--t", default="1.0")
    p.add_argument("--q", default="1.0,2.0")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--emit", default="fragments",
                   choices=["fragments", "moments", "empirical"])
    common(p)

    p = sub.add_parser("disk", help="reflected Brownian walk in the disk")
    p.add_argument("--T", type=float, default=16.0)
    p.add_argument("--h", type=float, default=1e-5)
    p.add_argument("--paths", type=int, default=10)
    p.add_argument("--emit", default="deficits", choices=["deficits", "survival", "hull"])
    p.add_argument("--t-grid", default="")
    p.add_argument("--x", type=float, default=0.9, help="survival target")
    p.add_argument("--stride", type=int, default=1000)
    common(p)

    p = sub.add_parser("verify", help="run the acceptance matrix")
    p.add_argument("--suite", default="fast", choices=["fast", "full"])
    common(p)

    p = sub.add_parser("bench", help="compare pure vs compiled kernels")
    common(p)
    return ap


def _extract_config(argv: list) -> tuple:
    """Pull --config PATH out of argv by hand (the subparsers positional
    makes a parse_known_args pre-pass reject otherwise valid lines)."""
    path = None
    rest = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
            i += 2
            continue
        if a.startswith("--config="):
            path = a.split("=", 1)[1]
            i += 1
            continue
        rest.append(a)
        i += 1
    return path, rest


def apply_config(ap: argparse.ArgumentParser, argv: list) -> argparse.Namespace:
    """Parse argv, with values from --config as overridable defaults."""
    path, rest = _extract_config(argv)
    if path:
        cp = configparser.ConfigParser()
        read = cp.read(path)
        if not read or "run" not in cp:
            ap.error(f"config file {path!r} missing a [run] section")
        cfg = dict(cp["run"])
        command = cfg.pop("command", None)
        if command and (not rest or rest[0].startswith("-")):
            rest = [command] + rest
        extra = []
        for key, val in cfg.items():
            flag = "--" + key.replace("_", "-")
            if flag not in rest:
                extra.extend([flag, val])
        argv = rest + extra
    return ap.parse_args(argv)


# --------------------------------------------------------------------------
# workers (top level so they pickle for --jobs)
# --------------------------------------------------------------------------

def _simulate_block(args):
    params, blk, m = args
    ns = argparse.Namespace(**params)
    tr = make_triplet(ns)
    ts = sorted(_parse_floats(ns.t))
    xi, rho = sample_xi_rho(tr, ts, m, RngStream(ns.seed), start_block=blk)
    return blk, xi, rho


def _disk_block(args):
    params, blk, m = args
    from . import _backend
    h = params["h"]
    n_steps = int(round(params["T"] / h))
    eps = 3.0 * math.sqrt(h)
    return blk, _backend.disk_block(RngStream(params["seed"], (blk,)).bit_generator(),
                                    m, n_steps, h, eps, 2.0 * h, math.sqrt(h),
                                    params["stride"])


def _pool_map(fn, work, jobs):
    if jobs <= 1:
        return [fn(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, work))


# --------------------------------------------------------------------------
# subcommand drivers
# --------------------------------------------------------------------------

def cmd_laplace(ns) -> int:
    tr = make_triplet(ns)
    mv = MeasureV(tr)
    rows = []
    g = ns.gamma_index if ns.gamma_index is not None else (
        ns.gamma if ns.family == "stable" else None)
    for q in _parse_floats(ns.q):
        for t in _parse_floats(ns.t):
            exact = laplace_xi_rho(tr, q, t, measure=mv)
            gform = laplace_xi_rho_gaussian_form(tr, q, t, measure=mv)
            asym = (asymptotic_laplace(tr, g, q, t)
                    if (g is not None and t > 0) else math.nan)
            ratio = exact / asym if asym and not math.isnan(asym) else math.nan
            rows.append((q, t, exact, gform, asym, ratio))
    emit_csv(ns.out,
             [f"seed={ns.seed}", f"col exact: {FORMULAS['exact']}",
              f"col gaussian_form: {FORMULAS['gaussian_form']}",
              f"col asymptotic: {FORMULAS['asymptotic']}"],
             ["q", "t", "exact", "gaussian_form", "asymptotic", "ratio"], rows)
    return 0


def cmd_asymptotic(ns) -> int:
    from .transform import log_asymptotic_laplace, log_laplace_xi_rho
    tr = make_triplet(ns)
    g = ns.gamma_index if ns.gamma_index is not None else (
        ns.gamma if ns.family == "stable" else None)
    if g is None:
        raise FraglogError("asymptotic needs --gamma-index for non-stable families")
    rows = []
    for q in _parse_floats(ns.q):
        for t in _parse_floats(ns.t):
            # log route: the ratio stays meaningful long past underflow
            le = log_laplace_xi_rho(tr, q, t)
            la = log_asymptotic_laplace(tr, g, q, t)
            rows.append((q, t, math.exp(le), math.exp(la), math.exp(le - la)))
    emit_csv(ns.out, [f"seed={ns.seed}", f"col asymptotic: {FORMULAS['asymptotic']}"],
             ["q", "t", "exact", "asymptotic", "ratio"], rows)
    return 0


def cmd_dgamma(ns) -> int:
    rows = [(lam, d_gamma_laplace(ns.gamma, lam)) for lam in _parse_floats(ns.lam)]
    emit_csv(ns.out, [f"seed={ns.seed}", f"gamma={ns.gamma}",
                      f"col value: {FORMULAS['dgamma']}"],
             ["lambda", "value"], rows)
    return 0


def cmd_measure(ns) -> int:
    tr = make_triplet(ns)
    if ns.mode == "numeric" and tr.is_stable:
        raise FraglogError("numeric mode is for non-stable triplets")
    mv = MeasureV(tr)
    rows = []
    for x in _parse_floats(ns.x):
        v, verr = mv.v_bar_with_error(x)
        l, lerr = mv.l_bar_with_error(x)
        rows.append((x, v, verr, l, lerr))
    emit_csv(ns.out, [f"seed={ns.seed}", f"mode={mv.mode}",
                      f"col v_bar: {FORMULAS['v_bar']}",
                      f"col l_bar: {FORMULAS['l_bar']}"],
             ["x", "v_bar", "v_err", "l_bar", "l_err"], rows)
    return 0


def cmd_simulate(ns) -> int:
    params = vars(ns).copy()
    ts = sorted(_parse_floats(ns.t))
    qs = _parse_floats(ns.q)
    n = ns.paths
    blocks = []
    start, blk = 0, 0
    while start < n:
        m = min(BLOCK_PATHS, n - start)
        blocks.append((params, blk, m))
        start += m
        blk += 1
    results = _pool_map(_simulate_block, blocks, ns.jobs)
    results.sort(key=lambda r: r[0])
    xi = np.vstack([r[1] for r in results])
    rho = np.vstack([r[2] for r in results])
    if ns.emit == "samples":
        rows = [(i, t, xi[i, j], rho[i, j])
                for i in range(n) for j, t in enumerate(ts)]
        emit_csv(ns.out, [f"seed={ns.seed}", f"col xi: {FORMULAS['xi']}"],
                 ["path", "t", "xi", "rho"], rows)
    else:
        rows = []
        for j, t in enumerate(ts):
            finite = np.isfinite(xi[:, j])
            for q in qs:
                v = np.where(finite, np.exp(-q * xi[:, j]), 0.0)
                rows.append((q, t, v.mean(), v.std() / math.sqrt(n), finite.mean()))
        emit_csv(ns.out, [f"seed={ns.seed}", f"paths={n}",
                          "col mc_mean: MC average of exp(-q xi_rho(t))"],
                 ["q", "t", "mc_mean", "mc_se", "finite_fraction"], rows)
    return 0


def cmd_fragsim(ns) -> int:
    nu = make_dislocation(ns)
    ts = sorted(_parse_floats(ns.t))
    qs = _parse_floats(ns.q)
    if ns.emit == "moments":
        from .fragmentation import moment_sums_bulk
        acc = moment_sums_bulk(nu, ts, qs, ns.runs, RngStream(ns.seed))
        tr = dislocation_to_triplet(nu)
        rows = []
        for j, t in enumerate(ts):
            for iq, q in enumerate(qs):
                v = acc[:, j, iq]
                from .transform import fragmentation_moment
                rows.append((q, t, v.mean(), v.std() / math.sqrt(ns.runs),
                             fragmentation_moment(tr, q, t)))
        emit_csv(ns.out, [f"seed={ns.seed}", f"runs={ns.runs}",
                          f"col mc_moment: {FORMULAS['moment']}"],
                 ["q", "t", "mc_moment", "mc_se", "predicted"], rows)
        return 0
    t_end = ts[-1]
    rows = []
    for r in range(ns.runs):
        state = simulate_fragmentation(nu, t_end, RngStream(ns.seed, (r,)))
        if ns.emit == "fragments":
            rows.extend((r, f.mass, f.birth) for f in state.fragments)
        else:
            em = empirical_measure(state, nu)
            rows.extend((r, loc, w) for loc, w in zip(em.locations, em.weights))
    if ns.emit == "fragments":
        emit_csv(ns.out, [f"seed={ns.seed}", f"t={t_end}"],
                 ["run", "mass", "birth"], rows)
    else:
        emit_csv(ns.out, [f"seed={ns.seed}", f"t={t_end}",
                          f"col location: {FORMULAS['location']}"],
                 ["run", "location", "weight"], rows)
    return 0


def cmd_disk(ns) -> int:
    from .disk import (HitAngles, hull_comparison, narrow_escape_tail,
                       perimeter_deficit)
    params = {"T": ns.T, "h": ns.h, "seed": ns.seed,
              "stride": ns.stride if ns.emit == "hull" else 0}
    if ns.emit == "survival":
        grid = _parse_floats(ns.t_grid) if ns.t_grid else list(
            np.linspace(ns.T / 20.0, ns.T, 20))
        curve = narrow_escape_tail(ns.x, grid, ns.paths,
                                   RngStream(ns.seed, (99,)), h=ns.h)
        rows = [(t, s) for t, s in zip(curve.t_grid, curve.survival)]
        emit_csv(ns.out, [f"seed={ns.seed}", f"x={ns.x}",
                          f"fitted_rate={curve.fitted_rate:.8e}",
                          f"predicted_rate={curve.predicted_rate:.8e}",
                          f"col survival: {FORMULAS['survival']}",
                          f"predicted: {FORMULAS['predicted_rate']}"],
                 ["t", "survival"], rows)
        return 0

    blocks = []
    start, blk = 0, 0
    while start < ns.paths:
        m = min(DISK_BLOCK_PATHS, ns.paths - start)
        blocks.append((params, blk, m))
        start += m
        blk += 1
    results = _pool_map(_disk_block, blocks, ns.jobs)
    results.sort(key=lambda r: r[0])
    all_hits, all_traj = [], []
    for _, (hits, traj) in results:
        all_hits.extend(hits)
        if traj is not None:
            all_traj.extend(traj)

    ts = _parse_floats(ns.t_grid) if ns.t_grid else [ns.T / 4, ns.T / 2, ns.T]
    rows = []
    if ns.emit == "deficits":
        for i, (times, angles) in enumerate(all_hits):
            ha = HitAngles.from_records(times, angles)
            for t in ts:
                rep = perimeter_deficit(ha.up_to(t))
                rows.append((i, t, rep.perimeter_deficit, rep.area_deficit,
                             rep.cubic_perimeter))
        emit_csv(ns.out, [f"seed={ns.seed}", f"h={ns.h}",
                          f"col perimeter_deficit: {FORMULAS['perimeter_deficit']}",
                          f"col area_deficit: {FORMULAS['area_deficit']}",
                          f"col cubic: {FORMULAS['cubic']}"],
                 ["path", "t", "perimeter_deficit", "area_deficit", "cubic_perimeter"],
                 rows)
    else:  # hull
        for i, (times, angles) in enumerate(all_hits):
            ha = HitAngles.from_records(times, angles)
            p_bar, p_chord = hull_comparison(np.asarray(all_traj[i]), ha)
            rows.append((i, ns.T, p_bar, p_chord))
        emit_csv(ns.out, [f"seed={ns.seed}",
                          "col p_bar: hull perimeter of sampled trajectory",
                          "col p_chord: chord perimeter of hit angles"],
                 ["path", "t", "p_bar", "p_chord"], rows)
    return 0


def cmd_verify(ns) -> int:
    from .acceptance import DEFAULT_SEED, run_suite
    failures = run_suite(ns.suite, seed=ns.seed if ns.seed else DEFAULT_SEED)
    return 3 if failures else 0


def cmd_bench(ns) -> int:
    from .bench import run_benchmark
    run_benchmark()
    return 0


DISPATCH = {
    "laplace": cmd_laplace,
    "asymptotic": cmd_asymptotic,
    "dgamma": cmd_dgamma,
    "measure": cmd_measure,
    "simulate": cmd_simulate,
    "fragsim": cmd_fragsim,
    "disk": cmd_disk,
    "verify": cmd_verify,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = apply_config(ap, argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    if not ns.command:
        ap.print_help()
        return 1
    try:
        return DISPATCH[ns.command](ns)
    except FraglogError as exc:
        print(f"fraglog: numeric failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OverflowError) as exc:
        print(f"fraglog: numeric failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
