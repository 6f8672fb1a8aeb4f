"""Command-line driver: sweeps, validation suites, traces, hollow cores.

Subcommands
-----------
sweep      continuation run from the trivial solution, with milestone output
validate   run the built-in oracle cross-check suites
trace      streamlines for a stored solution point
hollow     leading-order hollow-vortex data for a list of core radii
asym       small-amplitude prediction tables

Configuration comes from flags, optionally overlaid on a JSON config file
(flags win).  Gravity is parameterized internally by delta = 1/F^2 so that
F = infinity is exactly representable as --delta 0.
"""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import analysis, hollow as hv, oracles, potentials as pot
from .solver import (SCHEMA_VERSION, ContinuationSettings, CurveRecord,
                     WaveParams, NonconvergenceError, SingularJacobianError,
                     continue_curve, jacobian, residual, trivial_point)
from .spectral import SurfaceSpectrum, conformal_map, eval_w, surface_traces

__all__ = ["main"]


def _apply_config_file(args, parser):
    """Overlay values from --config for flags not given explicitly."""
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config file: {exc}")
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if getattr(args, dest, None) is None and hasattr(args, dest):
            setattr(args, dest, val)


def _resolved_config(args, parser):
    """Dict of the effective configuration (flags over config file)."""
    out = {k: v for k, v in sorted(vars(args).items())
           if k not in ("func", "config") and v is not None}
    out["schema_version"] = SCHEMA_VERSION
    return out


def _check_common(args, parser):
    """Validate the shared physical parameters; returns delta."""
    if (args.delta is None) == (args.froude is None):
        parser.error("exactly one of --delta and --froude is required")
    if args.froude is not None:
        if not args.froude > 0:
            parser.error("--froude must be positive")
        delta = 1.0 / args.froude ** 2
    else:
        if args.delta < 0:
            parser.error("--delta must be nonnegative")
        delta = args.delta
    M = args.M
    if M < 16 or M > 4096 or (M & (M - 1)) != 0:
        parser.error("-M must be a power of two between 2^4 and 2^12")
    if not args.lam > 0:
        parser.error("--lambda must be positive")
    return delta


def _prepend_comment(path, doc):
    """Embed a config/schema comment line at the top of a text file."""
    with open(path) as fh:
        body = fh.read()
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(doc, sort_keys=True) + "\n" + body)


def _error_exit(outdir, message, detail=None):
    doc = {"error": message, "detail": detail, "schema_version": SCHEMA_VERSION}
    print(json.dumps(doc), file=sys.stderr)
    if outdir:
        os.makedirs(outdir, exist_ok=True)
        with open(os.path.join(outdir, "error.json"), "w") as fh:
            json.dump(doc, fh, indent=1)
    return 1


def cmd_sweep(args, parser):
    delta = _check_common(args, parser)
    params = WaveParams(delta=delta, lam=args.lam, M=args.M)
    settings = ContinuationSettings(
        ds0=args.ds0, max_steps=args.max_steps,
        ds_max=args.ds_max, stop_beta=args.stop_beta,
        stop_after_overhang=args.stop_after_overhang,
        beta_max=args.beta_max,
        underres_threshold=(None if args.no_underres_stop
                            else ContinuationSettings.underres_threshold),
    )
    cfg = _resolved_config(args, parser)
    outdir = args.outdir
    os.makedirs(outdir, exist_ok=True)
    try:
        rec = continue_curve(trivial_point(params), params, settings)
    except (NonconvergenceError, SingularJacobianError,
            pot.AdmissibilityError) as exc:
        return _error_exit(outdir, type(exc).__name__, str(exc))

    curve_path = os.path.join(outdir, "curve.jsonl")
    rec.to_jsonl(curve_path, meta=not args.no_meta)
    analysis.emit(rec, outdir, prefix="curve")
    _prepend_comment(os.path.join(outdir, "curve_summary.csv"), cfg)

    # milestones: every k-th accepted point, the first overhang, the stop
    idxs = set(range(0, len(rec.points), max(1, args.milestone_every)))
    idxs.add(len(rec.points) - 1)
    first_over = None
    for i, ptk in enumerate(rec.points):
        if analysis.overhang_flag(ptk, params):
            first_over = i
            break
    if first_over is not None:
        idxs.add(first_over)
    for i in sorted(idxs):
        wavei = analysis.reconstruct(rec.points[i], params)
        if args.streamlines:
            wavei.streamlines = analysis.trace_streamlines(rec.points[i], params)
        meta = None if args.no_meta else {"created": time.strftime("%Y-%m-%d")}
        paths = analysis.emit(wavei, outdir, prefix=f"point_{i:04d}", meta=meta)
        for p in paths:
            if p.endswith(".csv"):
                _prepend_comment(p, dict(cfg, point_index=i))
    print(f"sweep: {len(rec.points)} points, stop reason {rec.stop_reason!r}, "
          f"outputs in {outdir}")
    return 0


# ---------------------------------------------------------------------------
# validation suites
# ---------------------------------------------------------------------------

def _checks_potentials():
    rng = np.random.default_rng(7)
    out = []
    # gamma_solitary agrees with the exact-family circulation
    worst = 0.0
    for beta in rng.uniform(0.05, 0.95, 20):
        w = oracles.ExactZeroGravityWave(float(beta))
        par = oracles.exact_params(w)
        g = pot.gamma_solitary(par["kappa"], float(beta))
        worst = max(worst, abs(g - par["gamma"]) / abs(par["gamma"]))
    out.append(("gamma_solitary matches exact family", worst, 1e-11))
    # lattice sum vs Weierstrass zeta: zeta(2i beta) is purely imaginary,
    # 2i beta eta_I purely real, and S = -(Im zeta + Re(2i beta eta_I))/(2 pi)
    beta, lam = 0.25, 2.0
    zw = complex(pot.weierstrass_zeta(2j * beta, lam))
    eta1 = pot.weierstrass_eta1(lam)
    lhs = pot.lattice_sum_S(beta, lam)
    rhs = -(zw.imag + (2j * beta * eta1).real) / (2.0 * math.pi)
    out.append(("lattice sum S vs zeta identity", abs(lhs - rhs), 1e-12))
    # circulation around the vortex equals gamma (solitary and periodic)
    for half in (None, 3.0):
        gamma = -2.5
        cfg = pot.VortexConfig(gamma=gamma, beta=0.4, half_period=half)
        th = 2.0 * math.pi * np.arange(2048) / 2048
        z = 0.4j + 0.1 * np.exp(1j * th)
        _, Wz = pot.complex_potential(z, cfg)
        circ = np.mean(Wz * 0.1 * np.exp(1j * th)) * 2.0 * math.pi * 1j
        tag = "solitary" if half is None else "periodic"
        out.append((f"vortex circulation ({tag})", abs(circ - gamma), 1e-10))
    # a_periodic positivity over admissible parameters
    a = pot.a_periodic(np.linspace(-1, 1, 101), 0.5, 0.25, 1.0)
    out.append(("a_periodic >= 1", max(0.0, 1.0 - float(a.min())), 1e-12))
    return out


def _checks_exact_family():
    out = []
    for beta in (0.1, 0.25, 0.5, 0.75, 0.9):
        w = oracles.ExactZeroGravityWave(beta)
        res = oracles.exact_equilibrium_residuals(w)
        out.append((f"equilibrium residuals beta={beta}",
                    max(res["advection_err"], res["bernoulli_err"]), 1e-10))
    err = abs(oracles.overturn_beta_numeric() - oracles.exact_overturn_beta())
    out.append(("overturn threshold root", err, 1e-8))
    d = [oracles.circle_limit_distance(b) for b in (0.8, 0.9, 0.99)]
    out.append(("circle limit decreasing",
                max(0.0, d[1] - d[0], d[2] - d[1]), 0.0))
    out.append(("circle limit at 0.99", d[2], 0.05))
    return out


def _checks_spectral():
    rng = np.random.default_rng(3)
    c = np.concatenate([[0.02], 0.01 * rng.standard_normal(16) / np.arange(1, 17) ** 2])
    spec = SurfaceSpectrum(c, 4.0)
    xi = np.linspace(-4, 4, 33)
    w, wx, we = surface_traces(spec, xi)
    fz = conformal_map(spec, xi + 1j, 1)
    err = float(np.max(np.abs(fz - (1 + we + 1j * wx))))
    out = [("Cauchy-Riemann trace identity", err, 1e-13)]
    w2 = eval_w(spec, xi, np.ones_like(xi))
    out.append(("trace consistency", float(np.max(np.abs(w - w2))), 1e-14))
    return out


def _checks_solver():
    params = WaveParams(delta=0.25, lam=5.0, M=32)
    pt = trivial_point(params)
    r = residual(pt, params)
    out = [("trivial residual", float(np.max(np.abs(r))), 1e-14)]
    J = jacobian(pt, params)
    theta = pt.theta()
    h = 1e-6
    cols = []
    for i in range(len(theta)):
        tp = theta.copy(); tp[i] += h
        tm = theta.copy(); tm[i] -= h
        from .solver import SolutionPoint
        rp = residual(SolutionPoint.from_theta(tp, params.lam), params)
        rm = residual(SolutionPoint.from_theta(tm, params.lam), params)
        cols.append((rp - rm) / (2 * h))
    Jfd = np.column_stack(cols)
    rel = float(np.max(np.abs(J - Jfd)) / max(1.0, np.max(np.abs(Jfd))))
    out.append(("jacobian vs central differences", rel, 1e-5))
    return out


def _checks_asymptotics():
    out = []
    worst = 0.0
    for F2 in (1.5, 2.0, 4.0):
        for xi in (0.3, 0.5, 2.0):
            for eta in (0.0, 0.5, 1.0):
                a = oracles.ddotw_integral(xi, eta, F2)
                b = oracles.ddotw_series(xi, eta, F2)
                worst = max(worst, abs(a - b))
    out.append(("ddotw integral vs series", worst, 1e-8))
    # surface condition w_eta - w/F^2 = pi^2 sech^2(pi xi/2) at eta = 1
    F2 = 2.0
    h = 1e-5
    worst = 0.0
    for xi in (0.1, 0.7, 1.9):
        w0 = oracles.ddotw_series(xi, 1.0, F2)
        we = (3.0 * w0 - 4.0 * oracles.ddotw_series(xi, 1.0 - h, F2)
              + oracles.ddotw_series(xi, 1.0 - 2 * h, F2)) / (2.0 * h)
        src = math.pi ** 2 / math.cosh(0.5 * math.pi * xi) ** 2
        worst = max(worst, abs(we - w0 / F2 - src))
    out.append(("ddotw surface condition", worst, 1e-6))
    roots = oracles.dispersion_roots(2.0, 6)["t_k"]
    gaps = np.diff(roots - np.pi * np.arange(len(roots)))
    out.append(("dispersion root offsets increasing",
                max(0.0, float(-gaps.min())), 0.0))
    return out


def _checks_hollow():
    out = []
    # Cauchy operator vs direct quadrature for mu = Re sigma at tau = 1
    n = 8192
    sig = np.exp(2j * math.pi * np.arange(n) / n)
    vals = np.empty_like(sig)
    vals[1:] = (np.real(sig[1:]) - 1.0) / (sig[1:] - 1.0)
    vals[0] = 0.5
    quad = complex(np.mean(vals * sig))
    mode = complex(hv.cauchy_op({1: 0.5, -1: 0.5}, 1.0))
    out.append(("cauchy_op vs quadrature", abs(quad - mode), 1e-3))
    # trace limit of the layer potential
    mu = {1: 0.3, -1: 0.3}
    rho, beta = 1e-4, 0.25
    tau = np.exp(0.7j)
    tr = hv.layer_potential(mu, rho, beta, 1j * beta + rho * tau)
    co = complex(hv.cauchy_op(mu, tau))
    out.append(("layer potential trace limit", abs(tr - co) / rho, 10.0))
    # centroid parity in rho
    base = hv.PointVortexBase.from_exact(0.25)
    out.append(("centroid odd in rho",
                abs(hv.centroid(base, 0.02) + hv.centroid(base, -0.02)), 1e-14))
    return out


_SUITES = {
    "potentials": _checks_potentials,
    "exact-family": _checks_exact_family,
    "spectral": _checks_spectral,
    "solver": _checks_solver,
    "asymptotics": _checks_asymptotics,
    "hollow": _checks_hollow,
}


def cmd_validate(args, parser):
    if args.inject_fault:
        if args.inject_fault not in pot.FAULT_HOOKS:
            parser.error(f"unknown fault hook {args.inject_fault!r}")
        pot.FAULT_HOOKS[args.inject_fault] = True
    groups = list(_SUITES)
    if args.only:
        unknown = [g for g in args.only if g not in _SUITES]
        if unknown:
            parser.error(f"unknown suite(s): {', '.join(unknown)}")
        groups = args.only
    failures = 0
    for g in groups:
        for name, measured, tol in _SUITES[g]():
            ok = measured <= tol
            failures += not ok
            print(f"{'PASS' if ok else 'FAIL'} [{g}] {name}: "
                  f"measured={measured:.3e} tol={tol:.3e}")
    print(f"validate: {failures} failure(s)")
    return 1 if failures else 0


def _load_point(args, parser):
    try:
        rec = CurveRecord.from_jsonl(args.input)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        parser.error(f"cannot read solution file: {exc}")
    if not rec.points:
        parser.error("solution file contains no points")
    idx = args.index if args.index is not None else len(rec.points) - 1
    if not -len(rec.points) <= idx < len(rec.points):
        parser.error(f"point index {idx} out of range")
    return rec.points[idx], rec.params


def cmd_trace(args, parser):
    point, params = _load_point(args, parser)
    cfg = _resolved_config(args, parser)
    os.makedirs(args.outdir, exist_ok=True)
    wave = analysis.reconstruct(point, params)
    wave.streamlines = analysis.trace_streamlines(
        point, params, n_seeds=args.n_seeds)
    meta = None if args.no_meta else {"created": time.strftime("%Y-%m-%d")}
    paths = analysis.emit(wave, args.outdir, prefix=args.prefix, meta=meta)
    for p in paths:
        if p.endswith(".csv"):
            _prepend_comment(p, cfg)
    print(f"trace: wrote {len(paths)} files to {args.outdir}")
    return 0


def cmd_hollow(args, parser):
    if (args.beta is None) == (args.input is None):
        parser.error("exactly one of --beta and --input is required")
    if args.beta is not None:
        base = hv.PointVortexBase.from_exact(args.beta)
    else:
        point, params = _load_point(args, parser)
        base = hv.PointVortexBase.from_solution(point, params)
    cfg = _resolved_config(args, parser)
    os.makedirs(args.outdir, exist_ok=True)
    for rho in args.rho:
        approx = hv.hollow_approx(base, rho, n_nodes=args.n_nodes)
        doc = json.loads(approx.to_json())
        doc["config"] = cfg
        path = os.path.join(args.outdir, f"hollow_rho{rho:g}.json")
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)
        print(f"hollow: rho={rho:g} -> {path}")
    return 0


def cmd_asym(args, parser):
    delta = _check_common_asym(args, parser)
    if delta == 0:
        parser.error("asym requires a finite Froude number (delta > 0)")
    F2 = 1.0 / delta
    cfg = _resolved_config(args, parser)
    os.makedirs(args.outdir, exist_ok=True)
    path = os.path.join(args.outdir, "asym.csv")
    rows = []
    for beta in args.beta:
        pred = oracles.small_amplitude_prediction(beta, F2)
        rows.append([beta, pred["kappa"], pred["gamma"], pred["b"]])
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(cfg, sort_keys=True) + "\n")
        fh.write("beta,kappa,gamma,b\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    print(f"asym: wrote {path}")
    return 0


def _check_common_asym(args, parser):
    if (args.delta is None) == (args.froude is None):
        parser.error("exactly one of --delta and --froude is required")
    if args.froude is not None:
        if not args.froude > 0:
            parser.error("--froude must be positive")
        return 1.0 / args.froude ** 2
    if args.delta < 0:
        parser.error("--delta must be nonnegative")
    return args.delta


def _add_physics_flags(sub):
    sub.add_argument("--delta", type=float, default=None,
                     help="gravity coefficient 1/F^2 (0 for zero gravity)")
    sub.add_argument("--froude", type=float, default=None,
                     help="Froude number F (alternative to --delta)")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="vortexwave",
        description="Traveling gravity water waves with submerged point vortices")
    parser.add_argument("--config", default=None,
                        help="JSON config file; explicit flags take precedence")
    subs = parser.add_subparsers(dest="command", required=True)

    ps = subs.add_parser("sweep", help="continuation sweep from the trivial wave")
    _add_physics_flags(ps)
    ps.add_argument("--lambda", dest="lam", type=float, default=None,
                    help="half-period of the conformal domain")
    ps.add_argument("-M", type=int, default=None,
                    help="number of spectral modes (power of two, 16..4096)")
    ps.add_argument("--outdir", default="out")
    ps.add_argument("--ds0", type=float, default=0.02)
    ps.add_argument("--ds-max", type=float, default=0.5)
    ps.add_argument("--max-steps", type=int, default=400)
    ps.add_argument("--stop-beta", type=float, default=None)
    ps.add_argument("--stop-after-overhang", type=int, default=None,
                    metavar="N", help="stop N accepted steps after the first "
                    "overturned profile")
    ps.add_argument("--beta-max", type=float, default=0.995)
    ps.add_argument("--milestone-every", type=int, default=5)
    ps.add_argument("--streamlines", action="store_true")
    ps.add_argument("--no-underres-stop", action="store_true")
    ps.add_argument("--no-meta", action="store_true")
    ps.set_defaults(func=cmd_sweep)

    pv = subs.add_parser("validate", help="run the oracle cross-check suites")
    pv.add_argument("--only", nargs="+", default=None,
                    help=f"restrict to suites: {', '.join(_SUITES)}")
    pv.add_argument("--inject-fault", default=None,
                    help="enable a named fault hook (test-of-tests)")
    pv.set_defaults(func=cmd_validate)

    pt = subs.add_parser("trace", help="streamlines for a stored solution point")
    pt.add_argument("--input", required=True, help="curve JSON-lines file")
    pt.add_argument("--index", type=int, default=None,
                    help="point index (default: last)")
    pt.add_argument("--n-seeds", type=int, default=6)
    pt.add_argument("--outdir", default="out")
    pt.add_argument("--prefix", default="trace")
    pt.add_argument("--no-meta", action="store_true")
    pt.set_defaults(func=cmd_trace)

    ph = subs.add_parser("hollow", help="leading-order hollow-vortex data")
    ph.add_argument("--beta", type=float, default=None,
                    help="exact-family base position (alternative to --input)")
    ph.add_argument("--input", default=None, help="curve JSON-lines file")
    ph.add_argument("--index", type=int, default=None)
    ph.add_argument("--rho", type=float, nargs="+", required=True)
    ph.add_argument("--n-nodes", type=int, default=512)
    ph.add_argument("--outdir", default="out")
    ph.add_argument("--no-meta", action="store_true")
    ph.set_defaults(func=cmd_hollow)

    pa = subs.add_parser("asym", help="small-amplitude prediction tables")
    _add_physics_flags(pa)
    pa.add_argument("--beta", type=float, nargs="+", required=True)
    pa.add_argument("--outdir", default="out")
    pa.add_argument("--no-meta", action="store_true")
    pa.set_defaults(func=cmd_asym)

    args = parser.parse_args(argv)
    _apply_config_file(args, parser)
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
