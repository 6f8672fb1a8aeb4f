"""Analytically known references: the exact zero-gravity solitary family,
small-amplitude asymptotics, and the integral/series representations of
the second-order corrector w-double-dot.

These serve as independent validation oracles for the numerical solver;
nothing here depends on the spectral discretization.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .potentials import VortexConfig, complex_potential

__all__ = [
    "ExactZeroGravityWave",
    "exact_map",
    "exact_params",
    "exact_overturn_beta",
    "overturn_beta_numeric",
    "exact_equilibrium_residuals",
    "circle_limit_distance",
    "ddotw_integral",
    "ddotw_eta_derivative_at_origin",
    "dispersion_roots",
    "ddotw_series",
    "small_amplitude_prediction",
]


@dataclass(frozen=True)
class ExactZeroGravityWave:
    """Member of the explicit zero-gravity (F = infinity) solitary family."""

    beta: float

    def __post_init__(self):
        if not abs(self.beta) < 1:
            raise ValueError(f"|beta| < 1 required, got {self.beta}")


def exact_map(wave: ExactZeroGravityWave, zeta, deriv_order=0):
    """The closed-form zero-gravity conformal map or its derivatives.

        f(zeta; beta) = zeta + (8/pi) tan^2(pi beta/2)
                        * sinh(pi zeta/2) / (cos(pi beta/2) + cosh(pi zeta/2))

    Derivatives up to order 3 are hand-differentiated; the test suite
    certifies them against complex-step finite differences.
    """
    if not 0 <= deriv_order <= 3:
        raise ValueError("deriv_order must be between 0 and 3")
    z = np.asarray(zeta, dtype=complex)
    b = wave.beta
    A = (8.0 / math.pi) * math.tan(0.5 * math.pi * b) ** 2
    c = math.cos(0.5 * math.pi * b)
    p = 0.5 * math.pi
    sh = np.sinh(p * z)
    ch = np.cosh(p * z)
    den = c + ch
    if deriv_order == 0:
        return z + A * sh / den
    if deriv_order == 1:
        return 1.0 + A * p * (c * ch + 1.0) / den ** 2
    if deriv_order == 2:
        return A * p ** 2 * sh * (c * c - c * ch - 2.0) / den ** 3
    # third derivative, from differentiating the second
    num = (ch * (c * c - c * ch - 2.0) - c * sh * sh) * den \
        - 3.0 * sh * sh * (c * c - c * ch - 2.0)
    return A * p ** 3 * num / den ** 4


def exact_params(wave: ExactZeroGravityWave):
    """{kappa, gamma, b} of the exact family member.

    kappa(beta) = -sin^3(pi b/2) sec(pi b/2) / 2,
    gamma(beta) = -8 sin(pi b/2) sec^3(pi b/2),
    b(beta)     = beta + (4/pi) tan^3(pi b/2).
    """
    h = 0.5 * math.pi * wave.beta
    sec = 1.0 / math.cos(h)
    return {
        "kappa": -0.5 * math.sin(h) ** 3 * sec,
        "gamma": -8.0 * math.sin(h) * sec ** 3,
        "b": wave.beta + (4.0 / math.pi) * math.tan(h) ** 3,
    }


def exact_overturn_beta():
    """beta at which the exact family first overturns: arccos(1 - sqrt 2)/pi."""
    return math.acos(1.0 - math.sqrt(2.0)) / math.pi


def _min_surface_fz(beta, xi_max=6.0, n_scan=2001):
    """min over xi of Re f_zeta(xi + i; beta), by scan plus local refinement."""
    wave = ExactZeroGravityWave(beta)
    xi = np.linspace(0.0, xi_max, n_scan)
    vals = np.real(exact_map(wave, xi + 1j, 1))
    j = int(np.argmin(vals))
    lo = xi[max(j - 1, 0)]
    hi = xi[min(j + 1, n_scan - 1)]
    res = optimize.minimize_scalar(
        lambda x: float(np.real(exact_map(wave, x + 1j, 1))),
        bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-13},
    )
    return float(res.fun)


def overturn_beta_numeric(bracket=(0.5, 0.7), tol=1e-12):
    """Overturning threshold recovered numerically from min Re f_zeta = 0."""
    return float(optimize.brentq(_min_surface_fz, bracket[0], bracket[1],
                                 xtol=tol, rtol=8.9e-16))


def exact_equilibrium_residuals(wave: ExactZeroGravityWave, n_grid=512):
    """Pointwise equilibrium errors of the exact family.

    advection_err = |f_zz(i beta)/f_z(i beta) - pi i kappa(beta)|;
    bernoulli_err = sup over an n_grid surface grid of
    | |W_zeta| / |f_zeta| - 1 | with the solitary potential at
    (gamma(beta), beta).  Both vanish for a correct implementation.
    """
    if wave.beta == 0:
        raise ValueError("residuals require beta != 0")
    pars = exact_params(wave)
    zb = 1j * wave.beta
    adv = abs(exact_map(wave, zb, 2) / exact_map(wave, zb, 1)
              - 1j * math.pi * pars["kappa"])
    cfg = VortexConfig(gamma=pars["gamma"], beta=wave.beta)
    xi = np.linspace(-8.0, 8.0, n_grid)
    _, Wz = complex_potential(xi + 1j, cfg)
    fz = exact_map(wave, xi + 1j, 1)
    bern = float(np.max(np.abs(np.abs(Wz) / np.abs(fz) - 1.0)))
    return {"advection_err": float(adv), "bernoulli_err": bern}


def circle_limit_distance(beta, n_samples=2000):
    """Distance of the rescaled exact surface to (unit circle at i) u (real line).

    The surface is normalized by h(beta) = (Im f(i) - 1)/2; as beta -> 1 the
    rescaled profile approaches a unit circle resting on the real axis.
    Returns sup over sampled surface points of the distance to the limit set.
    """
    wave = ExactZeroGravityWave(beta)
    h = 0.5 * (float(np.imag(exact_map(wave, 1j))) - 1.0)
    # the circular bulb is traversed for xi = O(cos(pi beta/2)); sample on a
    # sinh-stretched grid that resolves that scale and still reaches the tails
    c = math.cos(0.5 * math.pi * beta)
    u_max = min(9.0, math.asinh(40.0 / c))
    u = np.linspace(-u_max, u_max, n_samples)
    xi = c * np.sinh(u)
    pts = exact_map(wave, xi + 1j) / h
    d_circle = np.abs(np.abs(pts - 1j) - 1.0)
    d_line = np.abs(np.imag(pts))
    return float(np.max(np.minimum(d_circle, d_line)))


def _sinh_ratio_scalar(eta, t):
    """sinh(eta t)/sinh(2 t), stable for large t; t may be an array."""
    t = np.asarray(t, dtype=float)
    small = t < 1e-8
    ts = np.where(small, 1.0, t)
    ae = abs(eta)
    out = np.sign(eta) * np.exp((ae - 2.0) * ts) \
        * (-np.expm1(-2.0 * ae * ts)) / (-np.expm1(-4.0 * ts))
    return np.where(small, 0.5 * eta, out)


def ddotw_integral(xi, eta, F_sq, epsabs=1e-13, limit=400):
    """Fourier-integral representation of the corrector:

        ddot w(zeta) = 8 int_0^inf [F^2 t/(F^2 t - tanh t)]
                       [sinh(eta t)/sinh(2t)] cos(xi t) dt,  F^2 > 1.
    """
    if not F_sq > 1:
        raise ValueError(f"F^2 > 1 required, got {F_sq}")
    if abs(eta) > 1:
        raise ValueError(f"|eta| <= 1 required, got {eta}")
    if eta == 0:
        return 0.0

    def integrand(t):
        if t < 1e-8:
            amp = F_sq / (F_sq - 1.0)
            return 8.0 * amp * 0.5 * eta
        amp = F_sq * t / (F_sq * t - math.tanh(t))
        return 8.0 * amp * float(_sinh_ratio_scalar(eta, t)) * math.cos(xi * t)

    t_max = 45.0 / (2.0 - abs(eta)) + abs(xi)
    val, _ = integrate.quad(integrand, 0.0, t_max, epsabs=epsabs,
                            epsrel=1e-12, limit=limit)
    return val


def ddotw_eta_derivative_at_origin(F_sq, order, epsabs=1e-13):
    """Odd eta-derivatives of ddot w at the origin:

        d^{2m+1}_eta ddot w(0) = 8 int_0^inf F^2 t^{2m+2}
                                 / ((F^2 t - tanh t) sinh 2t) dt,
    with order = 2m+1.  Certified by finite differences of ddotw_integral.
    """
    if not F_sq > 1:
        raise ValueError(f"F^2 > 1 required, got {F_sq}")
    if order % 2 == 0 or order < 1:
        raise ValueError("only odd derivative orders are nonzero at eta = 0")
    p = order + 1

    def integrand(t):
        if t < 1e-8:
            return 8.0 * F_sq / (F_sq - 1.0) * t ** (p - 2) * 0.5
        den = (F_sq * t - math.tanh(t))
        # 1/sinh(2t), stable form
        inv_sh = 2.0 * math.exp(-2.0 * t) / (-math.expm1(-4.0 * t))
        return 8.0 * F_sq * t ** p / den * inv_sh

    val, _ = integrate.quad(integrand, 0.0, 50.0, epsabs=epsabs,
                            epsrel=1e-12, limit=400)
    return val


def dispersion_roots(F_sq, k_max):
    """Positive solutions t_k of F^2 t cot t = 1 with t_k - k pi in (0, pi/2),
    and the partial-fraction weights T_k = (1 - (1/t_k^2)(1/F^2)(1 - 1/F^2))^{-1}.
    """
    if not F_sq > 1:
        raise ValueError(f"F^2 > 1 required, got {F_sq}")
    t = np.empty(k_max + 1)
    for k in range(k_max + 1):
        lo = k * math.pi + 1e-12 * max(1.0, k)
        hi = k * math.pi + 0.5 * math.pi - 1e-12 * max(1.0, k + 1)
        # F^2 t cot t = 1  <=>  tan t = F^2 t on (k pi, k pi + pi/2)
        g = lambda x: math.tan(x) - F_sq * x
        t[k] = optimize.brentq(g, lo, hi, xtol=1e-15, rtol=8.9e-16)
    T = 1.0 / (1.0 - (1.0 / t ** 2) * (1.0 / F_sq) * (1.0 - 1.0 / F_sq))
    return {"t_k": t, "T_k": T}


def ddotw_series(xi, eta, F_sq, k_max=80):
    """Series representation of ddot w away from xi = 0:

        ddot w = 2 pi sin(eta pi/2)/(cosh(xi pi/2) + cos(eta pi/2)) + 4 pi v,
        v = sum_k T_k sin(t_k eta) e^{-t_k |xi|}/sin^2(t_k)
            - sin(eta pi/2) cosh(xi pi/2)/(cosh(pi xi) - cos(pi eta)).
    """
    if xi == 0:
        raise ValueError("series representation is valid only for xi != 0")
    roots = dispersion_roots(F_sq, k_max)
    t, T = roots["t_k"], roots["T_k"]
    ax = abs(xi)
    ssum = float(np.sum(T * np.sin(t * eta) * np.exp(-t * ax) / np.sin(t) ** 2))
    closed = math.sin(0.5 * math.pi * eta) * math.cosh(0.5 * math.pi * ax) \
        / (math.cosh(math.pi * ax) - math.cos(math.pi * eta))
    lead = 2.0 * math.pi * math.sin(0.5 * math.pi * eta) \
        / (math.cosh(0.5 * math.pi * ax) + math.cos(0.5 * math.pi * eta))
    return lead + 4.0 * math.pi * (ssum - closed)


def small_amplitude_prediction(beta, F_sq):
    """Leading-order small-amplitude asymptotics at vortex altitude beta:

        w^beta(surface) = ddot w(. + i) beta^2,
        kappa^beta = -(1/pi) d^3_eta ddot w(0) beta^3,
        gamma^beta = -4 tan(pi beta),
        b^beta     = beta + d_eta ddot w(0) beta^3.
    """
    d1 = ddotw_eta_derivative_at_origin(F_sq, 1)
    d3 = ddotw_eta_derivative_at_origin(F_sq, 3)

    def w_surface(xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        vals = np.array([ddotw_integral(x, 1.0, F_sq) for x in xi])
        return vals * beta ** 2

    return {
        "w_surface": w_surface,
        "kappa": -(d3 / math.pi) * beta ** 3,
        "gamma": -4.0 * math.tan(math.pi * beta),
        "b": beta + d1 * beta ** 3,
    }
