"""Physical-space post-processing: surfaces, streamlines, diagnostics.

Solutions live in the conformal strip; everything here maps them to the
physical plane through the conformal map, traces level sets of the stream
function Im W, and writes plot-ready CSV/JSON files.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import potentials as pot
from .solver import SolutionPoint, WaveParams, CurveRecord
from .spectral import conformal_map, eval_w, injectivity_check

__all__ = [
    "PhysicalWave",
    "reconstruct",
    "overhang_flag",
    "monotonicity_flag",
    "stream_function",
    "bottom_stagnation",
    "trace_streamlines",
    "point_polyline_distance",
    "emit",
]


@dataclass
class PhysicalWave:
    """Reconstructed wave: surface polyline, vortex data, streamlines, flags."""

    surface: np.ndarray            # (n, 2) array of (x, y)
    vortex: tuple                  # (0, b)
    gamma: float
    streamlines: list = field(default_factory=list)   # [(label, (n,2) array)]
    flags: dict = field(default_factory=dict)


def _vortex_config(theta: SolutionPoint, params: WaveParams):
    g = pot.gamma_periodic(theta.kappa, theta.beta, params.lam)
    return pot.VortexConfig(gamma=g, beta=theta.beta, half_period=params.lam)


def reconstruct(theta: SolutionPoint, params: WaveParams, n_points=1024):
    """PhysicalWave for an accepted solution point."""
    lam = params.lam
    xi = np.linspace(-lam, lam, n_points)
    surf = conformal_map(theta.spec, xi + 1j)
    b = float(np.imag(conformal_map(theta.spec, 1j * theta.beta)))
    g = pot.gamma_periodic(theta.kappa, theta.beta, lam)
    inj = injectivity_check(theta.spec)
    monotone, degenerate = monotonicity_flag(theta, params, annotated=True)
    return PhysicalWave(
        surface=np.column_stack([surf.real, surf.imag]),
        vortex=(0.0, b),
        gamma=g,
        flags={
            "overhanging": overhang_flag(theta, params),
            "monotone": monotone,
            "monotone_degenerate": degenerate,
            "self_intersecting": inj["self_intersecting"],
            "min_fz": inj["min_fz"],
        },
    )


def overhang_flag(theta: SolutionPoint, params: WaveParams, n_scan=2048):
    """True iff Re f_zeta(xi + i) changes sign on (0, lam): the surface
    x-coordinate is non-monotone over the half period (overturned wave)."""
    lam = params.lam
    xi = np.linspace(0.0, lam, n_scan + 1)[1:-1]
    vals = np.real(conformal_map(theta.spec, xi + 1j, 1))
    sign_change = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
    if sign_change.size == 0:
        return False
    # refine by bisection, mostly to confirm a genuine crossing
    i = int(sign_change[0])
    lo, hi = xi[i], xi[i + 1]
    flo = vals[i]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = float(np.real(conformal_map(theta.spec, mid + 1j, 1)))
        if fm == 0.0:
            break
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return True


def monotonicity_flag(theta: SolutionPoint, params: WaveParams,
                      grid=(48, 12), annotated=False):
    """Strict conformal monotonicity: w_xi < 0 at interior samples of
    (0, lam) x (0, 1], up to the spectral truncation noise floor.  The
    trivial solution (w_xi = 0) passes with a 'degenerate' annotation."""
    lam = params.lam
    xi = np.linspace(0.0, lam, grid[0] + 2)[1:-1]
    eta = np.linspace(0.0, 1.0, grid[1] + 1)[1:]
    w_xi = eval_w(theta.spec, xi[None, :], eta[:, None], dxi=1)
    coeffs = theta.spec.coeffs
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    degenerate = bool(np.max(np.abs(w_xi)) < 1e-12 * scale)
    # noise floor: unresolved tail modes feed w_xi at the level of the last
    # retained mode's derivative amplitude |w_M| * M*pi/lam
    tail = abs(coeffs[-1]) * (coeffs.size - 1) * np.pi / lam
    ok = degenerate or bool(np.max(w_xi) < max(1e-10 * scale, 4.0 * tail))
    return (ok, degenerate) if annotated else ok


def stream_function(theta: SolutionPoint, params: WaveParams, xi, eta=None):
    """Im W at strip points, with the periodic potential at
    gamma = gamma_periodic(kappa, beta, lambda)."""
    z = np.asarray(xi, dtype=complex) if eta is None \
        else np.asarray(xi, dtype=float) + 1j * np.asarray(eta, dtype=float)
    cfg = _vortex_config(theta, params)
    W, _ = pot.complex_potential(z, cfg)
    return np.imag(W)


def bottom_stagnation(theta: SolutionPoint, params: WaveParams, n_scan=400):
    """Root of W_zeta(xi, 0) = 0 on (0, lam) (bed stagnation point), or
    None when no sign change exists (small-amplitude waves)."""
    cfg = _vortex_config(theta, params)
    if cfg.gamma == 0.0:
        return None
    lam = params.lam
    xi = np.linspace(lam * 1e-4, lam * (1 - 1e-9), n_scan)
    _, Wz = pot.complex_potential(xi + 0j, cfg)
    u = np.real(Wz)
    idx = np.nonzero(np.diff(np.sign(u)) != 0)[0]
    if idx.size == 0:
        return None
    lo, hi = xi[idx[0]], xi[idx[0] + 1]
    ulo = u[idx[0]]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        _, Wm = pot.complex_potential(np.array([mid + 0j]), cfg)
        um = float(np.real(Wm[0]))
        if (um > 0) == (ulo > 0):
            lo, ulo = mid, um
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _follow_level(cfg, seed, step=0.01, max_steps=40000, psi_tol=1e-9):
    """Predictor-corrector level-set tracing of psi = Im W in the strip.

    The level direction is (Re W_zeta, -Im W_zeta) (perpendicular to the
    gradient of Im W); the corrector projects back along the gradient.
    Returns (points, closed, truncated).
    """
    lam = cfg.half_period if cfg.half_period is not None else np.inf

    sgn = 1.0 if step > 0 else -1.0
    step = abs(step)

    def psi_grad(z):
        W, Wz = pot.complex_potential(np.asarray([z]), cfg)
        return float(np.imag(W[0])), complex(Wz[0])

    psi0, Wz0 = psi_grad(seed)
    pts = [seed]
    z = seed
    Wz = Wz0
    truncated = False
    for k in range(max_steps):
        speed = abs(Wz)
        if speed < 1e-12:
            truncated = True
            break
        tang = sgn * np.conj(Wz) / speed
        # shorten the step near the vortex so the corrector stays in basin
        h = min(step, 0.3 * abs(z - 1j * cfg.beta) + 1e-4)
        z_new = z + h * tang
        ok = False
        for _ in range(12):
            try:
                p, g = psi_grad(z_new)
            except pot.PoleError:
                break
            if abs(g) < 1e-14:
                break
            # grad(Im W) = i conj(W'); Newton step back onto the level set
            z_new = z_new - 1j * np.conj(g) * (p - psi0) / abs(g) ** 2
            if abs(p - psi0) < psi_tol:
                ok = True
                break
        if not ok:
            truncated = True
            break
        if not (0.0 <= z_new.imag <= 1.0) or abs(z_new.real) > lam:
            pts.append(z_new)
            break
        pts.append(z_new)
        _, Wz = psi_grad(z_new)
        z = z_new
        if k > 10 and abs(z - seed) < h:
            pts.append(seed)
            return np.array(pts), True, False
    else:
        truncated = True
    return np.array(pts), False, truncated


def trace_streamlines(theta: SolutionPoint, params: WaveParams, seeds=None,
                      n_seeds=6, step=0.01, max_steps=40000):
    """Streamlines through seeds (default: equally spaced on (i beta, i)
    plus the bed separatrix), traced as level sets of Im W in the strip
    and mapped through the conformal map.

    Returns a list of (label, polyline) pairs; polylines are (n, 2)
    physical (x, y) arrays.
    """
    cfg = _vortex_config(theta, params)
    beta = theta.beta
    out = []
    if seeds is None:
        fr = (np.arange(1, n_seeds + 1)) / (n_seeds + 1)
        seeds = [1j * (beta + f * (1.0 - beta)) for f in fr]
    labeled = [(f"level_{i}", s) for i, s in enumerate(seeds)]
    if cfg.gamma != 0.0:
        xs = bottom_stagnation(theta, params)
        if xs is not None:
            labeled.append(("separatrix", complex(xs, 1e-4)))
    for label, seed in labeled:
        if cfg.gamma == 0.0:
            # uniform flow: streamlines are horizontal lines
            xi = np.linspace(-params.lam, params.lam, 257)
            strip = xi + 1j * seed.imag
            closed = False
        else:
            strip, closed, truncated = _follow_level(
                cfg, complex(seed), step=step, max_steps=max_steps)
            if not closed:
                back, _, _ = _follow_level(
                    cfg, complex(seed), step=-step, max_steps=max_steps)
                strip = np.concatenate([back[::-1], strip[1:]])
            if len(strip) < 4:
                continue
        phys = conformal_map(theta.spec, strip)
        poly = np.column_stack([phys.real, phys.imag])
        out.append({"label": label, "points": poly, "closed": bool(closed)})
    return out


def point_polyline_distance(points, polyline):
    """Distance from each query point to a polyline (segment projection).

    points: (n,) complex or (n,2); polyline: (m,) complex or (m,2).
    """
    P = np.asarray(points)
    if np.iscomplexobj(P):
        P = np.column_stack([P.real, P.imag])
    E = np.asarray(polyline)
    if np.iscomplexobj(E):
        E = np.column_stack([E.real, E.imag])
    A, B = E[:-1], E[1:]
    AB = B - A
    L2 = np.maximum((AB ** 2).sum(1), 1e-300)
    out = np.empty(len(P))
    for i, p in enumerate(P):
        t = np.clip(((p - A) * AB).sum(1) / L2, 0.0, 1.0)
        proj = A + t[:, None] * AB
        out[i] = math.sqrt(((p - proj) ** 2).sum(1).min())
    return out


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def emit(obj, outdir, prefix="wave", meta=None):
    """Write CSV and JSON mirrors of a PhysicalWave or CurveRecord.

    Column order is fixed; floats use 17 significant digits.  Returns the
    list of written paths.
    """
    import os

    os.makedirs(outdir, exist_ok=True)
    paths = []
    if isinstance(obj, PhysicalWave):
        p = os.path.join(outdir, f"{prefix}_surface.csv")
        _write_csv(p, ["x", "y"], obj.surface.tolist())
        paths.append(p)
        p = os.path.join(outdir, f"{prefix}_streamlines.csv")
        rows = []
        for line in obj.streamlines:
            rows.extend([[x, y, line["label"]] for x, y in line["points"]])
        _write_csv(p, ["x", "y", "label"], rows)
        paths.append(p)
        p = os.path.join(outdir, f"{prefix}.json")
        doc = {
            "surface": [[float(x), float(y)] for x, y in obj.surface],
            "vortex": [float(obj.vortex[0]), float(obj.vortex[1])],
            "gamma": float(obj.gamma),
            "streamlines": [
                {"label": line["label"], "closed": line.get("closed", False),
                 "points": [[float(x), float(y)] for x, y in line["points"]]}
                for line in obj.streamlines
            ],
            "flags": {k: (bool(v) if isinstance(v, (bool, np.bool_)) else float(v))
                      for k, v in obj.flags.items()},
        }
        if meta:
            doc["meta"] = meta
        with open(p, "w") as fh:
            json.dump(doc, fh, indent=1)
        paths.append(p)
    elif isinstance(obj, CurveRecord):
        p = os.path.join(outdir, f"{prefix}_summary.csv")
        rows = []
        s = obj.arclengths()
        for i, (pt, diag) in enumerate(zip(obj.points, obj.diagnostics)):
            b = float(np.imag(conformal_map(pt.spec, 1j * pt.beta)))
            over = overhang_flag(pt, obj.params)
            rows.append([s[i], pt.beta, pt.kappa, pt.Q, diag.get("gamma"),
                         b, over, diag.get("monotone"), diag.get("min_fz")])
        _write_csv(p, ["s", "beta", "kappa", "Q", "gamma", "b",
                       "overhang", "monotone", "min_fz"], rows)
        paths.append(p)
    else:
        raise TypeError(f"cannot emit object of type {type(obj)!r}")
    return paths
