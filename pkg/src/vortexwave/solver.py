"""Discrete residual, Newton corrector, and pseudo arc-length continuation.

The unknown is Theta = (w_0..w_M, Q, kappa, beta) in R^{M+4}.  The residual
stacks M+1 Bernoulli rows at the collocation nodes xi_j = j*lam/M,

    (1/2) a^2 / (w_xi^2 + (1 + w_eta)^2) + delta*w - 1/2 - Q,

one vortex-advection row  w_xixi/(1 + w_eta) - pi*kappa  at i*beta, and one
normalization row  sum_m (-1)^m w_m  (i.e. w(lam + i) = 0).

The Jacobian is assembled by scaled one-sided finite differences of the
residual; the Q column and the normalization row, which are exactly
linear, are hard-coded.  The w-coefficient columns reuse the base surface
traces (each coefficient enters the traces linearly), which keeps the FD
assembly at a few dense matrix operations instead of M+1 full residual
evaluations.
"""

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import potentials as pot
from .spectral import SurfaceSpectrum, conformal_map, eval_w

__all__ = [
    "WaveParams",
    "SolutionPoint",
    "CurveRecord",
    "ContinuationSettings",
    "NonconvergenceError",
    "SingularJacobianError",
    "DegeneratePointError",
    "CurveStalledError",
    "residual",
    "jacobian",
    "newton_correct",
    "tangent",
    "continue_curve",
    "trivial_point",
    "project_surface",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1

_SQRT_EPS = math.sqrt(np.finfo(float).eps)
# FD step scales per variable class (floor for h_i = sqrt(eps)*max(|x|, scale))
FD_SCALES = {"w": 1.0, "Q": 1.0, "kappa": 1.0, "beta": 1.0}


class NonconvergenceError(RuntimeError):
    def __init__(self, msg, residual_norm=None):
        super().__init__(msg)
        self.residual_norm = residual_norm


class SingularJacobianError(RuntimeError):
    """Singular bordered system (candidate fold/branch point)."""


class DegeneratePointError(RuntimeError):
    """Jacobian null space is not one-dimensional within tolerance."""


class CurveStalledError(RuntimeError):
    """Predictor/corrector failed at the minimum arc-length step."""


@dataclass(frozen=True)
class WaveParams:
    """delta = 1/F^2 (0 encodes F = infinity), half-period lam, mode count M."""

    delta: float
    lam: float
    M: int

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError(f"delta >= 0 required, got {self.delta}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.M < 1:
            raise ValueError(f"M >= 1 required, got {self.M}")


@dataclass(frozen=True)
class SolutionPoint:
    """One point Theta = (spec, Q, kappa, beta) on the bifurcation curve."""

    spec: SurfaceSpectrum
    Q: float
    kappa: float
    beta: float

    def theta(self):
        return np.concatenate([self.spec.coeffs, [self.Q, self.kappa, self.beta]])

    @staticmethod
    def from_theta(theta, lam):
        theta = np.asarray(theta, dtype=float)
        return SolutionPoint(
            spec=SurfaceSpectrum(theta[:-3].copy(), lam),
            Q=float(theta[-3]), kappa=float(theta[-2]), beta=float(theta[-1]),
        )

    def to_doc(self, params: WaveParams, residual_norm=None, diagnostics=None):
        return {
            "schema_version": SCHEMA_VERSION,
            "params": {"delta": params.delta, "lambda": params.lam, "M": params.M},
            "coeffs": [float(v) for v in self.spec.coeffs],
            "Q": self.Q,
            "kappa": self.kappa,
            "beta": self.beta,
            "residual_norm": residual_norm,
            "diagnostics": diagnostics or {},
        }

    @staticmethod
    def from_doc(doc):
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(
                f"schema_version {doc.get('schema_version')} not supported "
                f"(expected {SCHEMA_VERSION}); migrate the file first"
            )
        params = WaveParams(delta=doc["params"]["delta"],
                            lam=doc["params"]["lambda"], M=doc["params"]["M"])
        point = SolutionPoint(
            spec=SurfaceSpectrum(np.array(doc["coeffs"], dtype=float),
                                 params.lam),
            Q=doc["Q"], kappa=doc["kappa"], beta=doc["beta"],
        )
        return point, params


def trivial_point(params: WaveParams):
    """The uniform-flow solution (w = 0, Q = 0, kappa = 0, beta = 0)."""
    return SolutionPoint(SurfaceSpectrum(np.zeros(params.M + 1), params.lam),
                         0.0, 0.0, 0.0)


def project_surface(w_surface, params: WaveParams):
    """Cosine coefficients of a surface trace sampled at the collocation
    nodes (DCT-I projection); w_surface is a callable of xi or an array of
    node values."""
    from scipy.fft import dct

    xi = collocation_nodes(params)
    w = w_surface(xi) if callable(w_surface) else np.asarray(w_surface, float)
    y = dct(w, type=1)
    coeffs = y / params.M
    coeffs[0] *= 0.5
    coeffs[-1] *= 0.5
    return coeffs


def collocation_nodes(params: WaveParams):
    return np.arange(params.M + 1) * (params.lam / params.M)


# ---------------------------------------------------------------------------
# cached trigonometric tables per (M, lam)
# ---------------------------------------------------------------------------


class _Workspace:
    """Cosine/sine tables on the collocation grid, shared by residual and
    Jacobian assembly.  cos(k pi xi_j / lam) = cos(pi k j / M) depends only
    on k*j mod 2M, so the (M+1) x (M+1) table covers every Fourier order
    after index folding."""

    def __init__(self, M, lam):
        self.M, self.lam = M, lam
        j = np.arange(M + 1)
        m = np.arange(M + 1, dtype=float)
        ang = np.multiply.outer(m, j) * (math.pi / M)
        self.cos = np.cos(ang)          # (modes, nodes)
        self.sin = np.sin(ang)
        a = m * (math.pi / lam)
        with np.errstate(divide="ignore", invalid="ignore"):
            coth = (1.0 + np.exp(-2.0 * a)) / (-np.expm1(-2.0 * a))
        coth[0] = 1.0  # multiplier a*coth(a) -> 1 as a -> 0; stored as a*coth
        self.dtn = a * coth
        self.dtn[0] = 1.0
        self.a = a
        self.alt = np.where(np.arange(M + 1) % 2 == 0, 1.0, -1.0)

    def fold(self, k):
        """Map arbitrary Fourier orders k >= 0 onto table rows (cosine)."""
        k = np.asarray(k) % (2 * self.M)
        return np.where(k > self.M, 2 * self.M - k, k)

    def a_coefficient(self, kappa, beta):
        """a_periodic on the collocation grid via the folded cosine table.
        Returns (a_values, gamma)."""
        g = pot.gamma_periodic(kappa, beta, self.lam)
        if g == 0.0:
            return np.ones(self.M + 1), g
        r = pot.a_fourier_weights(beta, self.lam)
        wfold = np.zeros(self.M + 1)
        np.add.at(wfold, self.fold(np.arange(1, r.size + 1)), r)
        series = wfold @ self.cos
        vortex_term = (g / (2.0 * self.lam)) * (beta + 2.0 * series)
        if pot.FAULT_HOOKS["flip_a_periodic_sign"]:
            vortex_term = -vortex_term
        return 1.0 - vortex_term, g

    def traces(self, coeffs):
        """(w, w_xi, w_eta) on eta = 1 at the collocation nodes."""
        w = coeffs @ self.cos
        w_xi = -(coeffs * self.a) @ self.sin
        w_eta = (coeffs * self.dtn) @ self.cos
        return w, w_xi, w_eta

    def advection_basis(self, beta):
        """Per-coefficient values of w_xixi and w_eta at the vortex (0, beta).

        Row m of the advection residual's numerator/denominator is linear
        in w_m with these weights.
        """
        M, lam = self.M, self.lam
        m = np.arange(M + 1, dtype=float)
        a = m * (math.pi / lam)
        with np.errstate(divide="ignore", invalid="ignore"):
            e1 = np.exp(-a * (1.0 - beta))
            e2 = np.exp(-a * (1.0 + beta))
            den = -np.expm1(-2.0 * a)
            s_ratio = (e1 - e2) / den
            c_ratio = (e1 + e2) / den
            # w_xixi(0, beta) = -sum_m w_m a^2 sinh(a beta)/sinh(a), cos factor 1
            wxx = -(a ** 2) * s_ratio
            # w_eta(0, beta) = w_0 + sum_m w_m a cosh(a beta)/sinh(a)
            weta = a * c_ratio
        wxx[0] = 0.0
        weta[0] = 1.0
        return wxx, weta


_workspaces = {}


def _workspace(params: WaveParams) -> _Workspace:
    key = (params.M, params.lam)
    if key not in _workspaces:
        if len(_workspaces) > 6:
            _workspaces.clear()
        _workspaces[key] = _Workspace(params.M, params.lam)
    return _workspaces[key]


def _check_admissible(point: SolutionPoint):
    if not abs(point.beta) < 1:
        raise pot.AdmissibilityError(f"|beta| < 1 violated: beta={point.beta}")


def residual(point: SolutionPoint, params: WaveParams):
    """Residual vector of length M+3 (Bernoulli rows, advection, norm)."""
    _check_admissible(point)
    ws = _workspace(params)
    c = point.spec.coeffs
    w, w_xi, w_eta = ws.traces(c)
    a, _g = ws.a_coefficient(point.kappa, point.beta)
    denom = w_xi ** 2 + (1.0 + w_eta) ** 2
    bern = 0.5 * a * a / denom + params.delta * w - 0.5 - point.Q
    wxx_b, weta_b = ws.advection_basis(point.beta)
    adv = (c @ wxx_b) / (1.0 + c @ weta_b) - math.pi * point.kappa
    norm = ws.alt @ c
    out = np.concatenate([bern, [adv, norm]])
    if not np.all(np.isfinite(out)):
        bad = int(np.argmax(~np.isfinite(out)))
        raise FloatingPointError(f"non-finite residual at row {bad}")
    return out


def jacobian(point: SolutionPoint, params: WaveParams):
    """(M+3) x (M+4) one-sided finite-difference Jacobian.

    Columns ordered (w_0..w_M, Q, kappa, beta).  The Q column and the
    normalization row are analytic (exactly linear); the w columns
    perturb the (linear) surface traces directly.
    """
    _check_admissible(point)
    ws = _workspace(params)
    M = params.M
    n = M + 4
    c = point.spec.coeffs
    J = np.zeros((M + 3, n))

    w, w_xi, w_eta = ws.traces(c)
    a, _g = ws.a_coefficient(point.kappa, point.beta)
    wxx_b, weta_b = ws.advection_basis(point.beta)
    adv_num = c @ wxx_b
    adv_den = 1.0 + c @ weta_b

    def bernoulli(wv, wxv, wev, av, Q):
        return 0.5 * av * av / (wxv ** 2 + (1.0 + wev) ** 2) \
            + params.delta * wv - 0.5 - Q

    r_bern = bernoulli(w, w_xi, w_eta, a, point.Q)
    r_adv = adv_num / adv_den - math.pi * point.kappa

    # --- w_m columns: traces are linear in each coefficient -------------
    h_w = _SQRT_EPS * np.maximum(np.abs(c), FD_SCALES["w"])
    hcol = h_w[:, None]
    # per-mode trace contributions (modes x nodes)
    dw = ws.cos
    dwx = -(ws.a[:, None]) * ws.sin
    dwe = ws.dtn[:, None] * ws.cos
    pert = bernoulli(w[None, :] + hcol * dw,
                     w_xi[None, :] + hcol * dwx,
                     w_eta[None, :] + hcol * dwe,
                     a[None, :], point.Q)
    J[:M + 1, :M + 1] = ((pert - r_bern[None, :]) / hcol).T
    adv_pert = (adv_num + h_w * wxx_b) / (adv_den + h_w * weta_b) \
        - math.pi * point.kappa
    J[M + 1, :M + 1] = (adv_pert - r_adv) / h_w
    J[M + 2, :M + 1] = ws.alt

    # --- Q column (exactly linear) ---------------------------------------
    J[:M + 1, M + 1] = -1.0

    # --- kappa column: a depends on kappa only through gamma ------------
    h_k = _SQRT_EPS * max(abs(point.kappa), FD_SCALES["kappa"])
    a_k, _ = ws.a_coefficient(point.kappa + h_k, point.beta)
    J[:M + 1, M + 2] = (bernoulli(w, w_xi, w_eta, a_k, point.Q) - r_bern) / h_k
    J[M + 1, M + 2] = -math.pi

    # --- beta column ------------------------------------------------------
    h_b = _SQRT_EPS * max(abs(point.beta), FD_SCALES["beta"])
    if point.beta + h_b >= 1.0:
        h_b = -h_b
    a_b, _ = ws.a_coefficient(point.kappa, point.beta + h_b)
    J[:M + 1, M + 3] = (bernoulli(w, w_xi, w_eta, a_b, point.Q) - r_bern) / h_b
    wxx_p, weta_p = ws.advection_basis(point.beta + h_b)
    adv_p = (c @ wxx_p) / (1.0 + c @ weta_p) - math.pi * point.kappa
    J[M + 1, M + 3] = (adv_p - r_adv) / h_b
    return J


def _default_tol(point: SolutionPoint):
    return 1e-10 * max(1.0, abs(point.Q), abs(point.kappa))


def newton_correct(theta0, hyperplane, params: WaveParams, tol=None,
                   max_iter=25):
    """Damped Newton on {residual = 0, n.(Theta - anchor) = 0}.

    theta0 may be a SolutionPoint or a flat vector; hyperplane is a pair
    (anchor, normal) of vectors in R^{M+4} with unit normal.  Returns
    (SolutionPoint, info dict with 'iterations' and 'residual_norm').
    """
    anchor, normal = hyperplane
    anchor = np.asarray(anchor, dtype=float)
    normal = np.asarray(normal, dtype=float)
    theta = theta0.theta() if isinstance(theta0, SolutionPoint) else \
        np.asarray(theta0, dtype=float).copy()

    def augmented(th):
        p = SolutionPoint.from_theta(th, params.lam)
        r = residual(p, params)
        return p, np.concatenate([r, [normal @ (th - anchor)]])

    point, g = augmented(theta)
    gn = float(np.max(np.abs(g)))
    for it in range(max_iter):
        tol_eff = tol if tol is not None else _default_tol(point)
        if gn < tol_eff:
            return point, {"iterations": it, "residual_norm": gn}
        J = jacobian(point, params)
        A = np.vstack([J, normal])
        try:
            step = np.linalg.solve(A, -g)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianError(
                f"singular bordered system at iteration {it}") from exc
        lam_damp = 1.0
        for _ in range(30):
            try:
                cand_pt, cand_g = augmented(theta + lam_damp * step)
            except (pot.AdmissibilityError, pot.DegenerateConfigurationError,
                    FloatingPointError):
                lam_damp *= 0.5
                continue
            cand_n = float(np.max(np.abs(cand_g)))
            if cand_n < gn or cand_n < tol_eff:
                break
            lam_damp *= 0.5
        else:
            raise NonconvergenceError(
                f"Newton line search failed at iteration {it} "
                f"(residual norm {gn:.3e})", residual_norm=gn)
        theta = theta + lam_damp * step
        point, g, gn = cand_pt, cand_g, cand_n
    tol_eff = tol if tol is not None else _default_tol(point)
    if gn < tol_eff:
        return point, {"iterations": max_iter, "residual_norm": gn}
    raise NonconvergenceError(
        f"Newton did not converge in {max_iter} iterations "
        f"(residual norm {gn:.3e})", residual_norm=gn)


def tangent(point: SolutionPoint, params: WaveParams, previous=None):
    """Unit null vector of the Jacobian, oriented along `previous` (or
    toward increasing beta at the start of a curve)."""
    n = params.M + 4
    ref = np.zeros(n)
    ref[-1] = 1.0
    border = np.asarray(previous, dtype=float) if previous is not None else ref
    J = jacobian(point, params)
    A = np.vstack([J, border])
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        x = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegeneratePointError("bordered tangent system is singular") from exc
    t = x / np.linalg.norm(x)
    # null-vector quality: J t should vanish relative to the scale of J
    qual = np.max(np.abs(J @ t)) / max(1.0, np.max(np.abs(J)))
    if qual > 1e-5:
        raise DegeneratePointError(
            f"null space not one-dimensional (|J t| ratio {qual:.2e})")
    align = t @ (border if previous is not None else ref)
    if align < 0:
        t = -t
    return t


@dataclass
class ContinuationSettings:
    ds0: float = 0.02
    ds_min: float = 1e-7
    ds_max: float = 0.5
    predictor_order: int = 2
    max_steps: int = 400
    newton_tol: float | None = None
    newton_max_iter: int = 12
    stop_beta: float | None = None
    land_on_stop_beta: bool = True
    beta_max: float = 0.995
    admissibility_margin: float = 1e-8
    min_fz_threshold: float = 1e-3
    underres_threshold: float | None = 1e-6
    stop_after_overhang: int | None = None
    grow_iters: int = 3

    def __post_init__(self):
        if not 1 <= self.predictor_order <= 3:
            raise ValueError("predictor_order must be 1..3")


@dataclass
class CurveRecord:
    """An ordered bifurcation branch with tangents and step metadata."""

    params: WaveParams
    points: list = field(default_factory=list)
    tangents: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    events: list = field(default_factory=list)
    stop_reason: str | None = None
    settings: dict = field(default_factory=dict)

    def arclengths(self):
        return np.concatenate([[0.0], np.cumsum(self.steps)])

    def to_jsonl(self, path, meta=True):
        with open(path, "w") as fh:
            if meta:
                header = {
                    "schema_version": SCHEMA_VERSION,
                    "kind": "curve_meta",
                    "params": {"delta": self.params.delta,
                               "lambda": self.params.lam, "M": self.params.M},
                    "settings": self.settings,
                    "stop_reason": self.stop_reason,
                    "events": self.events,
                    "steps": list(self.steps),
                }
                fh.write(json.dumps(header) + "\n")
            for pt, diag in zip(self.points, self.diagnostics):
                doc = pt.to_doc(self.params,
                                residual_norm=diag.get("residual_norm"),
                                diagnostics={k: v for k, v in diag.items()
                                             if k != "residual_norm"})
                fh.write(json.dumps(doc) + "\n")

    @staticmethod
    def from_jsonl(path):
        points, diagnostics, params = [], [], None
        stop_reason, events, settings, steps = None, [], {}, None
        with open(path) as fh:
            for line in fh:
                doc = json.loads(line)
                if doc.get("kind") == "curve_meta":
                    stop_reason = doc.get("stop_reason")
                    events = doc.get("events", [])
                    settings = doc.get("settings", {})
                    steps = doc.get("steps")
                    continue
                pt, params = SolutionPoint.from_doc(doc)
                diag = dict(doc.get("diagnostics") or {})
                diag["residual_norm"] = doc.get("residual_norm")
                points.append(pt)
                diagnostics.append(diag)
        rec = CurveRecord(params=params, points=points, diagnostics=diagnostics,
                          events=events, stop_reason=stop_reason,
                          settings=settings)
        if steps is None:
            steps = [0.0] * max(0, len(points) - 1)
        rec.steps = steps
        return rec


def _point_diagnostics(point: SolutionPoint, params: WaveParams, res_norm):
    """Per-point diagnostics recorded along the curve."""
    spec = point.spec
    lam = params.lam
    xi = np.linspace(0.0, lam, 65)
    eta = np.linspace(0.125, 1.0, 8)
    fz = conformal_map(spec, xi[None, :] + 1j * eta[:, None], 1)
    min_fz = float(np.min(np.abs(fz)))
    g = pot.gamma_periodic(point.kappa, point.beta, lam)
    # strict conformal monotonicity on an interior sample grid
    xin = np.linspace(0.0, lam, 34)[1:-1]
    w_xi = eval_w(spec, xin[None, :], eta[:, None], dxi=1)
    scale = max(1.0, float(np.max(np.abs(spec.coeffs))))
    degenerate = bool(np.max(np.abs(w_xi)) < 1e-12 * scale)
    # noise floor: unresolved tail modes feed w_xi at the level of the last
    # retained mode's derivative amplitude |w_M| * M*pi/lam
    tail = abs(spec.coeffs[-1]) * (spec.coeffs.size - 1) * np.pi / lam
    tol = max(1e-10 * scale, 4.0 * tail)
    monotone = degenerate or bool(np.max(w_xi) < tol)
    cmax = float(np.max(np.abs(spec.coeffs))) if spec.coeffs.size else 0.0
    decay = abs(spec.coeffs[-1]) / cmax if cmax > 0 else 0.0
    xs = np.linspace(0.0, lam, 513)
    overhang = bool(np.min(np.real(conformal_map(spec, xs + 1j, 1))) < 0.0)
    return {
        "residual_norm": res_norm,
        "min_fz": min_fz,
        "monotone": monotone,
        "monotone_degenerate": degenerate,
        "overhang": overhang,
        "gamma": g,
        "coeff_decay": decay,
    }


def _stop_reason(point, diag, settings, params):
    beta = point.beta
    if settings.stop_beta is not None and beta >= settings.stop_beta:
        return "stop_beta"
    if not -settings.beta_max < beta < settings.beta_max:
        return "beta_range"
    if beta != 0:
        margin = abs(point.kappa - 4.0 * pot.lattice_sum_S(beta, params.lam))
        if margin < settings.admissibility_margin:
            return "admissibility_margin"
    if diag["min_fz"] < settings.min_fz_threshold:
        return "min_fz"
    if settings.underres_threshold is not None \
            and diag["coeff_decay"] > settings.underres_threshold \
            and np.max(np.abs(point.spec.coeffs)) > 1e-8:
        return "under_resolved"
    return None


def _predict(thetas, tangents, s_vals, s_new, order):
    """Polynomial extrapolation of points and tangents in arc length."""
    p = min(order, len(thetas) - 1)
    if p == 0:
        th = thetas[-1] + (s_new - s_vals[-1]) * tangents[-1]
        return th, tangents[-1]
    ss = np.asarray(s_vals[-(p + 1):])
    span = ss[-1] - ss[0]
    u = (ss - ss[-1]) / span
    u_new = (s_new - ss[-1]) / span
    V = np.vander(u, p + 1, increasing=True)
    P = np.stack(thetas[-(p + 1):])
    T = np.stack(tangents[-(p + 1):])
    try:
        cp = np.linalg.solve(V, P)
        ct = np.linalg.solve(V, T)
    except np.linalg.LinAlgError:
        th = thetas[-1] + (s_new - s_vals[-1]) * tangents[-1]
        return th, tangents[-1]
    powers = u_new ** np.arange(p + 1)
    th = powers @ cp
    tg = powers @ ct
    nrm = np.linalg.norm(tg)
    if nrm < 1e-12:
        tg = tangents[-1]
    else:
        tg = tg / nrm
    return th, tg


def continue_curve(start: SolutionPoint, params: WaveParams,
                   settings: ContinuationSettings | None = None):
    """Pseudo arc-length continuation from an exact starting solution."""
    settings = settings or ContinuationSettings()
    r0 = residual(start, params)
    tol0 = settings.newton_tol or _default_tol(start)
    if np.max(np.abs(r0)) > 10 * tol0:
        raise ValueError(
            f"start point does not solve the system (|r| = {np.max(np.abs(r0)):.3e})")
    rec = CurveRecord(params=params, settings={
        k: v for k, v in asdict(settings).items()})
    t0 = tangent(start, params)
    rec.points.append(start)
    rec.tangents.append(t0)
    rec.diagnostics.append(_point_diagnostics(start, params,
                                              float(np.max(np.abs(r0)))))
    thetas = [start.theta()]
    tangents_v = [t0]
    s_vals = [0.0]
    ds = settings.ds0
    prev_tan_beta = t0[-1]
    first_overhang = None

    while len(rec.points) - 1 < settings.max_steps:
        theta_pred, n_pred = _predict(thetas, tangents_v, s_vals,
                                      s_vals[-1] + ds,
                                      settings.predictor_order)
        try:
            point, info = newton_correct(
                theta_pred, (theta_pred, n_pred), params,
                tol=settings.newton_tol, max_iter=settings.newton_max_iter)
            new_tan = tangent(point, params, previous=tangents_v[-1])
        except (NonconvergenceError, SingularJacobianError,
                DegeneratePointError, pot.AdmissibilityError,
                pot.DegenerateConfigurationError, FloatingPointError):
            if ds <= settings.ds_min:
                if len(rec.points) == 1:
                    raise CurveStalledError(
                        f"first continuation step failed at ds_min="
                        f"{settings.ds_min}")
                rec.stop_reason = "stalled"
                break
            ds = max(0.5 * ds, settings.ds_min)
            continue

        step_len = float(np.linalg.norm(point.theta() - thetas[-1]))
        rec.points.append(point)
        rec.tangents.append(new_tan)
        rec.steps.append(step_len)
        diag = _point_diagnostics(point, params, info["residual_norm"])
        rec.diagnostics.append(diag)
        thetas.append(point.theta())
        tangents_v.append(new_tan)
        s_vals.append(s_vals[-1] + step_len)

        if new_tan[-1] * prev_tan_beta < 0:
            rec.events.append({"type": "fold", "index": len(rec.points) - 1,
                               "beta": point.beta})
        if new_tan[-1] != 0:
            prev_tan_beta = new_tan[-1]
        if diag["overhang"] and first_overhang is None:
            first_overhang = len(rec.points) - 1
            rec.events.append({"type": "overhang", "index": first_overhang,
                               "beta": point.beta})

        reason = _stop_reason(point, diag, settings, params)
        if reason is None and settings.stop_after_overhang is not None \
                and first_overhang is not None \
                and len(rec.points) - 1 - first_overhang \
                >= settings.stop_after_overhang:
            reason = "overhang"
        if reason is not None:
            rec.stop_reason = reason
            if reason == "stop_beta" and settings.land_on_stop_beta \
                    and point.beta > settings.stop_beta:
                _land_on_beta(rec, params, settings, thetas, s_vals)
            break
        if info["iterations"] <= settings.grow_iters:
            ds = min(2.0 * ds, settings.ds_max)
    else:
        rec.stop_reason = rec.stop_reason or "max_steps"
    return rec


def _land_on_beta(rec, params, settings, thetas, s_vals):
    """Replace the overshooting final point by a solve pinned at stop_beta."""
    n = params.M + 4
    normal = np.zeros(n)
    normal[-1] = 1.0
    target = thetas[-1].copy()
    # linear interpolation between the last two points as initial guess
    b1, b0 = thetas[-1][-1], thetas[-2][-1]
    if b1 != b0:
        frac = (settings.stop_beta - b0) / (b1 - b0)
        target = thetas[-2] + frac * (thetas[-1] - thetas[-2])
    target[-1] = settings.stop_beta
    try:
        point, info = newton_correct(target, (target, normal), params,
                                     tol=settings.newton_tol,
                                     max_iter=settings.newton_max_iter + 8)
    except (NonconvergenceError, SingularJacobianError):
        return
    new_tan = tangent(point, params, previous=rec.tangents[-1])
    rec.points[-1] = point
    rec.tangents[-1] = new_tan
    rec.diagnostics[-1] = _point_diagnostics(point, params,
                                             info["residual_norm"])
    rec.steps[-1] = float(np.linalg.norm(point.theta() - thetas[-2]))
    thetas[-1] = point.theta()
    s_vals[-1] = s_vals[-2] + rec.steps[-1]
