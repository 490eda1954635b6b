"""Command-line front end.

Usage::

    layermodes COMMAND --profile FILE [options]

Commands: spectrum, classify, modes, decay, floor, minamp, ratios,
liouville, existence, bv-converge, oracle.

Exit status: 0 success, 1 invalid input (schema or unmet precondition),
2 numerical failure, 3 a checked inequality is violated.  Violations are
listed in the report with their two sides.

CSV columns
-----------
spectrum      k,l,mu,lambda,residual
classify      k,l,mu,lambda,ratio,tag,xi
modes         k,l,lambda,y,u,du
decay         k,l,lambda,xi,d,lhs,rhs,observed_exponent,holds
floor         a,b,min_mass,floor,lambda_at_min,n_modes,holds
minamp        k,l,lambda,r2,argmin,midpoint_match,expected_match
ratios        k,l,lambda,max_residual,kappa,cumulative_holds
liouville     k,l,mu,lambda,alpha,sup_dev,volterra_bound,holds
existence     k,mu,lo,hi,count,lower_bound,past_threshold,first_eigenvalue,first_bound,holds
bv-converge   n,lambda_n,lambda_error,u_distance,du_distance,tv_n
oracle        k,l,lambda,lambda_fd,fd_error,agree
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import analysis as an
from . import general_solver as gs
from .cross_section import mu_values
from .errors import CheckFailure, LayerModesError, MissingDerivatives, MissingWell, NumericFailure, SchemaError
from .io import ProfileDocument, dump_csv, dump_structured, load_profile
from .layer_solver import build_eigenfunction, eigenvalues_in_window, evaluate
from .profile import LayeredProfile, SampledProfile, extremes, find_well

EXIT_OK, EXIT_SCHEMA, EXIT_NUMERIC, EXIT_VIOLATED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """Argument errors are input errors (exit 1), not numeric ones."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_SCHEMA, f"{self.prog}: error: {message}\n")


def _range(conv):
    def parse(text: str):
        parts = text.split("..")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}")
        try:
            lo, hi = conv(parts[0]), conv(parts[1])
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
        if not lo <= hi:
            raise argparse.ArgumentTypeError(f"empty range {text!r}")
        return lo, hi
    return parse


def _positive(text: str) -> float:
    x = float(text)
    if not (x > 0 and math.isfinite(x)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return x


def _open_unit(text: str) -> float:
    x = float(text)
    if not 0 < x < 1:
        raise argparse.ArgumentTypeError("t must lie in (0, 1)")
    return x


def _int_list(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v]


# ---------------------------------------------------------------------------
# shared helpers


def _eigenpairs(profile, mu, lo, hi, k, rel_tol):
    if isinstance(profile, LayeredProfile):
        return eigenvalues_in_window(mu, lo, hi, profile, rel_tol=rel_tol, k=k)
    return gs.eigenvalues_pruefer(mu, lo, hi, profile, k=k, rel_tol=max(rel_tol, 1e-13))


def _mu(ctx, k):
    return ctx["mus"][k - 1]


def _window(ctx, k, default):
    mu = _mu(ctx, k)
    lo, hi = ctx["window_mult"] if ctx["window_mult"] is not None else default
    return lo * mu * mu, hi * mu * mu


def _run_ks(fn: Callable, ctx: dict, ks: Sequence[int]) -> list:
    jobs = ctx["jobs"]
    if jobs > 1 and len(ks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(fn, [ctx] * len(ks), ks))
    else:
        parts = [fn(ctx, k) for k in ks]
    out = []
    for p in parts:
        out.extend(p)
    out.sort(key=lambda r: (r[0], r[1]))
    return out


def _require_layered(profile, command):
    if not isinstance(profile, LayeredProfile):
        raise SchemaError(f"`{command}` needs a layered profile", "kind")


def _require_sampled(profile, command):
    if not isinstance(profile, SampledProfile):
        raise SchemaError(f"`{command}` needs a sampled profile", "kind")


# ---------------------------------------------------------------------------
# per-k workers (top level so they can run in worker processes)


def _w_spectrum(ctx, k):
    mu = _mu(ctx, k)
    lo, hi = _window(ctx, k, (ctx["c_m"], 2.0 * ctx["c_M"]))
    return [(k, p.ell, mu, p.lam, p.residual) for p in _eigenpairs(ctx["profile"], mu, lo, hi, k, ctx["rel_tol"])]


def _w_classify(ctx, k):
    mu = _mu(ctx, k)
    lo, hi = _window(ctx, k, (ctx["c_m"], 2.0 * ctx["c_M"]))
    rows = []
    for p in _eigenpairs(ctx["profile"], mu, lo, hi, k, ctx["rel_tol"]):
        mc = an.classify(p, mu, ctx["profile"], ctx["eps"], ctx["well"])
        rows.append((k, p.ell, mu, p.lam, mc.ratio, mc.tag, mc.xi))
    return rows


def _w_modes(ctx, k):
    mu = _mu(ctx, k)
    lo, hi = _window(ctx, k, (ctx["c_m"], 2.0 * ctx["c_M"]))
    prof = ctx["profile"]
    y = np.linspace(0.0, prof.H, ctx["points"])
    rows = []
    for p in _eigenpairs(prof, mu, lo, hi, k, ctx["rel_tol"]):
        if isinstance(prof, LayeredProfile):
            u, du = evaluate(build_eigenfunction(p, prof), y)
        else:
            u, du = gs.normalized_solution(prof, p.lam, mu, y)
        rows.extend((k, p.ell, p.lam, yi, ui, di) for yi, ui, di in zip(y, u, du))
    return rows


def _w_decay(ctx, k):
    mu = _mu(ctx, k)
    well = ctx["well"]
    lo, hi = _window(ctx, k, (ctx["c_m"] * (1 - 1e-12), well.c1 - ctx["eps"]))
    prof = ctx["profile"]
    rows = []
    for p in eigenvalues_in_window(mu, lo, hi, prof, rel_tol=ctx["rel_tol"], k=k):
        if an.classify(p, mu, prof, ctx["eps"], well).tag != an.GUIDED:
            continue
        v = an.decay_bound_check(build_eigenfunction(p, prof), well, ctx["band"], ctx["t"])
        rows.append((k, p.ell, p.lam, v.xi, v.d, v.lhs, v.rhs, v.observed_exponent, v.holds))
    return rows


def _nonguided_window(ctx, k, extra=None):
    mu = _mu(ctx, k)
    lo = (ctx["c_M"] + ctx["eps"]) * mu * mu
    if extra is not None:
        lo = max(lo, extra(mu))
    if ctx["window_mult"] is not None:
        return _window(ctx, k, None)
    return lo, max(lo * 4.0, lo + 1.0)


def _w_floor_modes(ctx, k):
    mu = _mu(ctx, k)
    prof = ctx["profile"]
    width = min(b - a for a, b in ctx["bands"])
    lo, hi = _nonguided_window(ctx, k, lambda m: an.lambda0_band(m, ctx["c_M"], width))
    efs = []
    for p in eigenvalues_in_window(mu, lo, hi, prof, rel_tol=ctx["rel_tol"], k=k):
        ef = build_eigenfunction(p, prof)
        efs.append((k, p.ell, ef, an.min_amplitude(ef).r2))
    return efs


def _w_minamp(ctx, k):
    mu = _mu(ctx, k)
    prof = ctx["profile"]
    lo, hi = _nonguided_window(ctx, k)
    rows = []
    for p in eigenvalues_in_window(mu, lo, hi, prof, rel_tol=ctx["rel_tol"], k=k):
        r = an.min_amplitude(build_eigenfunction(p, prof))
        rows.append((k, p.ell, p.lam, r.r2, r.argmin, r.midpoint_match, r.expected_match, r.holds))
    return rows


def _w_ratios(ctx, k):
    mu = _mu(ctx, k)
    prof = ctx["profile"]
    lo, hi = _nonguided_window(ctx, k)
    rows = []
    for p in eigenvalues_in_window(mu, lo, hi, prof, rel_tol=ctx["rel_tol"], k=k):
        r = an.amplitude_ratios(build_eigenfunction(p, prof), ctx["eps"])
        ok = r.max_residual < ctx["residual_tol"] and r.cumulative_holds
        rows.append((k, p.ell, p.lam, r.max_residual, r.kappa, r.cumulative_holds, ok))
    return rows


def _w_liouville(ctx, k):
    mu = _mu(ctx, k)
    prof = ctx["profile"]
    c_M, eps, big = ctx["c_M"], ctx["eps"], ctx["big_lambda"]
    lo, hi = _window(ctx, k, (c_M + eps, c_M + big))
    rows = []
    for p in gs.eigenvalues_pruefer(mu, lo, hi, prof, k=k):
        fr = gs.liouville_transform(prof, p.lam, mu, eps=eps, big_lambda=big)
        res = gs.liouville_residual(fr)
        ok = res.sup_dev <= res.volterra_bound * (1 + 1e-6) + 1e-12
        rows.append((k, p.ell, mu, p.lam, res.alpha, res.sup_dev, res.volterra_bound, ok))
    return rows


def _w_oracle(ctx, k):
    mu = _mu(ctx, k)
    prof = ctx["profile"]
    lo, hi = _window(ctx, k, (ctx["c_m"], 2.0 * ctx["c_M"]))
    pairs = _eigenpairs(prof, mu, lo, hi, k, ctx["rel_tol"])
    fd = gs.fd_oracle(mu, prof, lo, hi, grid_n=ctx["grid_n"])
    by_index = {f.index: f for f in fd}
    rows = []
    for p in pairs:
        f = by_index.get(p.ell)
        if f is None:
            rows.append((k, p.ell, p.lam, math.nan, math.nan, False))
        else:
            rows.append((k, p.ell, p.lam, f.lam, f.error, abs(p.lam - f.lam) <= f.error))
    n_fd = len(fd)
    if n_fd != len(pairs):
        rows.append((k, 0, math.nan, math.nan, float(n_fd), False))
    return rows


# ---------------------------------------------------------------------------
# commands: each returns (columns, rows, summary, violations)


def cmd_spectrum(ctx):
    cols = ["k", "l", "mu", "lambda", "residual"]
    return cols, _run_ks(_w_spectrum, ctx, ctx["ks"]), {}, []


def cmd_classify(ctx):
    cols = ["k", "l", "mu", "lambda", "ratio", "tag", "xi"]
    rows = _run_ks(_w_classify, ctx, ctx["ks"])
    counts = {t: sum(1 for r in rows if r[5] == t) for t in (an.GUIDED, an.NONGUIDED, an.RESIDUAL)}
    return cols, rows, {"counts": counts}, []


def cmd_modes(ctx):
    cols = ["k", "l", "lambda", "y", "u", "du"]
    rows = _run_ks(_w_modes, ctx, ctx["ks"])
    rows.sort(key=lambda r: (r[0], r[1], r[3]))
    return cols, rows, {}, []


def _default_band(profile, well):
    H = profile.H
    if well.beta < H:
        span = H - well.beta
        return well.beta + 0.4 * span, well.beta + 0.8 * span
    span = well.alpha
    return 0.2 * span, 0.6 * span


def cmd_decay(ctx):
    if ctx["well"] is None:
        raise MissingWell("`decay` needs a well: give --c1 or a `well` block in the profile")
    _require_layered(ctx["profile"], "decay")
    if ctx["band"] is None:
        ctx["band"] = _default_band(ctx["profile"], ctx["well"])
    cols = ["k", "l", "lambda", "xi", "d", "lhs", "rhs", "observed_exponent", "holds"]
    rows = _run_ks(_w_decay, ctx, ctx["ks"])
    viol = [dict(k=r[0], l=r[1], lhs=r[5], rhs=r[6]) for r in rows if not r[8]]
    summary = {"band": list(ctx["band"]), "t": ctx["t"],
               "well": [ctx["well"].alpha, ctx["well"].beta], "c1": ctx["well"].c1}
    first = [r for r in rows if r[1] == min(x[1] for x in rows if x[0] == r[0])]
    if len(first) >= 2:
        summary["slope_log_lhs_vs_xi_d"] = an.regression_slope([r[3] * r[4] for r in first],
                                                               [math.log(r[5]) for r in first])
    return cols, rows, summary, viol


def cmd_floor(ctx):
    _require_layered(ctx["profile"], "floor")
    prof = ctx["profile"]
    if ctx["band"] is not None:
        ctx["bands"] = [ctx["band"]]
    else:
        H = prof.H
        ctx["bands"] = [(H * i / 10, H * (i + 1) / 10) for i in range(10)]
    items = _run_ks(_w_floor_modes, ctx, ctx["ks"])
    if not items:
        raise SchemaError("no NonGuided modes above the band threshold in the requested window", "window")
    modes = [it[2] for it in items]
    r2 = [it[3] for it in items]
    cols = ["a", "b", "min_mass", "floor", "lambda_at_min", "n_modes", "holds"]
    rows, viol = [], []
    for a, b in ctx["bands"]:
        rep = an.nonconcentration_floor(modes, (a, b), ctx["eps"], explore=ctx["explore"], r2_values=r2)
        i = int(np.argmin(rep.masses))
        rows.append((a, b, rep.min_mass, rep.floor, float(rep.lams[i]), len(modes), rep.holds))
        if not rep.holds:
            j = int(np.argmin(rep.masses - rep.floors))
            viol.append(dict(a=a, b=b, lam=float(rep.lams[j]), lhs=float(rep.masses[j]), rhs=float(rep.floors[j])))
    summary = {"r2_min": float(min(r2)), "explore": ctx["explore"],
               "lambda_alpha_eps": an.lambda_alpha_eps(ctx["c_M"], ctx["eps"],
                                                       min(b - a for a, b in ctx["bands"]))}
    return cols, rows, summary, viol


def cmd_minamp(ctx):
    _require_layered(ctx["profile"], "minamp")
    cols = ["k", "l", "lambda", "r2", "argmin", "midpoint_match", "expected_match"]
    rows = _run_ks(_w_minamp, ctx, ctx["ks"])
    viol = [dict(k=r[0], l=r[1], lhs=r[3], rhs="min half-wave peak") for r in rows if not r[7]]
    return cols, [r[:7] for r in rows], {}, viol


def cmd_ratios(ctx):
    _require_layered(ctx["profile"], "ratios")
    cols = ["k", "l", "lambda", "max_residual", "kappa", "cumulative_holds"]
    rows = _run_ks(_w_ratios, ctx, ctx["ks"])
    viol = [dict(k=r[0], l=r[1], lhs=r[3], rhs=ctx["residual_tol"]) for r in rows if not r[6]]
    return cols, [r[:6] for r in rows], {"residual_tol": ctx["residual_tol"]}, viol


def cmd_liouville(ctx):
    prof = ctx["profile"]
    _require_sampled(prof, "liouville")
    if not prof.has_derivatives:
        raise MissingDerivatives("`liouville` needs dsamples and ddsamples in the profile")
    cols = ["k", "l", "mu", "lambda", "alpha", "sup_dev", "volterra_bound", "holds"]
    rows = _run_ks(_w_liouville, ctx, ctx["ks"])
    viol = [dict(k=r[0], l=r[1], lhs=r[5], rhs=r[6]) for r in rows if not r[7]]
    consts = gs.liouville_constants(ctx["c_m"], ctx["c_M"], ctx["eps"], ctx["big_lambda"], prof.H)
    return cols, rows, {"big_lambda": ctx["big_lambda"], "constants": consts}, viol


def cmd_existence(ctx):
    prof = ctx["profile"]
    _require_layered(prof, "existence")
    rep = an.existence_verify(prof, ctx["eps"], list(range(ctx["ks"][0], ctx["ks"][-1] + 1)), ctx["cs"],
                              rel_tol=ctx["rel_tol"])
    cols = ["k", "mu", "lo", "hi", "count", "lower_bound", "past_threshold", "first_eigenvalue", "first_bound",
            "holds"]
    rows = [(v.k, v.mu, v.window[0], v.window[1], v.count, v.lower_bound, v.past_threshold, v.first_eigenvalue,
             v.first_bound, v.holds) for v in rep.verdicts]
    viol = [dict(k=v.k, lhs=v.count, rhs=v.lower_bound) for v in rep.verdicts if not v.holds]
    summary = {"count_slope": rep.count_slope}
    if rep.condition is not None:
        c = rep.condition
        summary.update(condition_lhs=c.lhs, condition_rhs=c.rhs, condition_holds=c.holds,
                       mu_threshold=c.mu_threshold, mu_sufficient=c.mu_sufficient)
    return cols, rows, summary, viol


def _first_nonguided(profile, mu, eps):
    _, c_M = extremes(profile)
    lo = (c_M + eps) * mu * mu
    hi = lo * 1.5
    while True:
        pairs = gs.eigenvalues_pruefer(mu, lo, hi, profile)
        if pairs:
            return pairs[0]
        hi *= 1.5


def cmd_bv(ctx):
    prof = ctx["profile"]
    _require_sampled(prof, "bv-converge")
    k = ctx["ks"][0]
    mu = _mu(ctx, k)
    target = _first_nonguided(prof, mu, ctx["eps"])
    rep = an.bv_convergence(prof, target.lam, mu, ctx["n_list"], tol=ctx["bv_tol"])
    cols = ["n", "lambda_n", "lambda_error", "u_distance", "du_distance", "tv_n"]
    rows = list(zip(rep.ns, rep.lam_n, rep.lam_errors, rep.u_distances, rep.du_distances, rep.tv_n))
    viol = []
    if not rep.holds:
        viol.append(dict(lhs=float(rep.lam_errors[-1]), rhs=rep.tol * rep.lam,
                         lam_decreasing=rep.lam_decreasing, u_decreasing=rep.u_decreasing, tv_ok=rep.tv_ok))
    summary = {"k": k, "lambda": rep.lam, "l": rep.ell, "tv": rep.tv}
    return cols, rows, summary, viol


def cmd_oracle(ctx):
    cols = ["k", "l", "lambda", "lambda_fd", "fd_error", "agree"]
    rows = _run_ks(_w_oracle, ctx, ctx["ks"])
    viol = [dict(k=r[0], l=r[1], lhs=abs(r[2] - r[3]), rhs=r[4]) for r in rows if not r[5]]
    return cols, rows, {"grid_n": ctx["grid_n"]}, viol


COMMANDS = {
    "spectrum": cmd_spectrum,
    "classify": cmd_classify,
    "modes": cmd_modes,
    "decay": cmd_decay,
    "floor": cmd_floor,
    "minamp": cmd_minamp,
    "ratios": cmd_ratios,
    "liouville": cmd_liouville,
    "existence": cmd_existence,
    "bv-converge": cmd_bv,
    "oracle": cmd_oracle,
}
CHECKS = {"decay", "floor", "minamp", "ratios", "liouville", "existence", "bv-converge", "oracle"}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--profile", required=True, help="profile document (YAML or JSON)")
    common.add_argument("--eps", type=_positive, help="spectral margin (default 0.05 (c_M - c_m))")
    common.add_argument("--k", type=_range(int), default=(1, 1), metavar="LO..HI", help="transverse indices")
    common.add_argument("--window-mult", type=_range(float), metavar="LO..HI",
                        help="eigenvalue window as multiples of mu_k^2")
    common.add_argument("--band", type=_range(float), metavar="A..B", help="band (a, b) in [0, H]")
    common.add_argument("--t", type=_open_unit, default=0.5, help="decay bound parameter in (0, 1)")
    common.add_argument("--rel-tol", type=_positive, default=1e-12, help="eigenvalue relative tolerance")
    common.add_argument("--residual-tol", type=_positive, default=1e-9, help="identity residual tolerance")
    common.add_argument("--format", choices=("structured", "csv"), default="structured")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for k sweeps")
    common.add_argument("--c1", type=_positive, help="well threshold (overrides the profile document)")
    common.add_argument("--points", type=int, default=201, help="samples per eigenfunction (modes)")
    common.add_argument("--explore", action="store_true", help="floor: measure modes below threshold")
    common.add_argument("--big-lambda", type=_positive, help="liouville: upper margin (default c_M)")
    common.add_argument("--n-list", type=_int_list, default=[8, 16, 32, 64, 128, 256, 512],
                        help="bv-converge: comma-separated layer counts")
    common.add_argument("--bv-tol", type=_positive, default=1e-4, help="bv-converge: final relative error")
    common.add_argument("--grid-n", type=int, default=4096, help="oracle: finite-difference cells")
    p = _Parser(prog="layermodes", description="Guided and non-guided modes of layered media.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def _context(args) -> dict:
    doc: ProfileDocument = load_profile(args.profile)
    prof = doc.profile
    if args.jobs < 1:
        raise SchemaError("--jobs must be positive", "jobs")
    if args.k[0] < 1:
        raise SchemaError("k must start at 1 or above", "k")
    c_m, c_M = extremes(prof)
    eps = args.eps if args.eps is not None else an.default_eps(prof)
    c1 = args.c1 if args.c1 is not None else doc.c1
    well = find_well(prof, c1) if c1 is not None else None
    ks = list(range(args.k[0], args.k[1] + 1))
    if args.band is not None and not (0.0 <= args.band[0] < args.band[1] <= prof.H):
        raise SchemaError(f"band must satisfy 0 <= a < b <= {prof.H}", "band")
    return dict(profile=prof, cs=doc.cross_section, eps=eps, c_m=c_m, c_M=c_M, well=well, ks=ks,
                mus=[m.mu for m in mu_values(doc.cross_section, ks[-1])],
                window_mult=args.window_mult, band=args.band, t=args.t, rel_tol=args.rel_tol,
                residual_tol=args.residual_tol, jobs=args.jobs, points=args.points, explore=args.explore,
                big_lambda=args.big_lambda if args.big_lambda is not None else c_M, n_list=args.n_list,
                bv_tol=args.bv_tol, grid_n=args.grid_n)


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    """Parse arguments, run one command and write its report; returns the exit status."""
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argument errors (status 1) and --help (status 0)
        return int(exc.code or 0)
    try:
        ctx = _context(args)
        cols, rows, summary, viol = COMMANDS[args.command](ctx)
    except NumericFailure as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CheckFailure as exc:
        print(f"violated: {exc} (lhs={exc.lhs}, rhs={exc.rhs})", file=sys.stderr)
        return EXIT_VIOLATED
    except (LayerModesError, ValueError) as exc:
        # schema errors and unmet preconditions (missing well, wrong profile kind, empty window, ...)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    status = EXIT_VIOLATED if (args.command in CHECKS and viol) else EXIT_OK
    if args.format == "csv":
        out.write(dump_csv(cols, rows))
    else:
        report = {"command": args.command, "profile": str(args.profile), "eps": ctx["eps"],
                  "k": [ctx["ks"][0], ctx["ks"][-1]], "columns": cols,
                  "rows": [list(r) for r in rows], "summary": summary,
                  "holds": not viol, "violations": viol}
        out.write(dump_structured(report))
    if status == EXIT_VIOLATED:
        for v in viol:
            print(f"violated: {v}", file=sys.stderr)
    return status


def main() -> None:  # pragma: no cover - thin wrapper
    sys.exit(run())
