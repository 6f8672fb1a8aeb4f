"""Cosine-spectral surface representation and its harmonic extension.

The surface unknown is the trace w(xi + i) = sum_m w_m cos(m pi xi/lam),
m = 0..M.  Its unique harmonic, 2*lambda-periodic, eta-odd extension into
the strip is

    w(xi, eta) = w_0 eta + sum_{m>=1} w_m cos(m pi xi/lam)
                 * sinh(m pi eta/lam) / sinh(m pi/lam),

and the associated conformal map is

    f(zeta) = (1 + w_0) zeta + sum_{m>=1} w_m sin(m pi zeta/lam)
              / sinh(m pi/lam),

which satisfies Im(f - zeta) = w, f real on the real axis, imaginary on
the imaginary axis.  All sinh ratios are evaluated in exponential form so
that no intermediate overflows for large m*pi/lam.
"""

import math
from dataclasses import dataclass

import numpy as np
from shapely.geometry import LineString

__all__ = [
    "SurfaceSpectrum",
    "StripPoint",
    "eval_w",
    "surface_traces",
    "conformal_map",
    "injectivity_check",
]


@dataclass(frozen=True)
class SurfaceSpectrum:
    """Coefficients w_0..w_M of the surface cosine series and half-period."""

    coeffs: np.ndarray
    half_period: float

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        if self.coeffs.ndim != 1 or self.coeffs.size < 1:
            raise ValueError("coeffs must be a nonempty 1-d array")
        if not self.half_period > 0:
            raise ValueError(f"half_period must be positive, got {self.half_period}")

    @property
    def M(self):
        return self.coeffs.size - 1

    def normalization_defect(self):
        """sum_m (-1)^m w_m, i.e. w(lambda + i); zero for normalized spectra."""
        signs = np.where(np.arange(self.coeffs.size) % 2 == 0, 1.0, -1.0)
        return float(signs @ self.coeffs)


@dataclass(frozen=True)
class StripPoint:
    """A point xi + i*eta of the closed strip |eta| <= 1."""

    xi: float
    eta: float

    def __post_init__(self):
        if not abs(self.eta) <= 1:
            raise ValueError(f"|eta| <= 1 required, got eta={self.eta}")


def _sinh_ratio(m, eta, lam, parity):
    """sinh(m pi eta/lam)/sinh(m pi/lam) (parity=0) or the cosh analog
    cosh(m pi eta/lam)/sinh(m pi/lam) (parity=1), overflow-safe.

    m is a 1-d array of mode numbers; eta may broadcast against it.
    """
    a = m * (math.pi / lam)
    e1 = np.exp(-a * (1.0 - eta))
    e2 = np.exp(-a * (1.0 + eta))
    sgn = 1.0 if parity == 1 else -1.0
    return (e1 + sgn * e2) / (-np.expm1(-2.0 * a))


def eval_w(spec: SurfaceSpectrum, xi, eta, dxi=0, deta=0):
    """Harmonic extension of the surface trace, or a partial derivative.

    dxi, deta are nonnegative derivative orders with dxi + deta <= 3.
    xi, eta may be scalars or broadcastable arrays.
    """
    if dxi < 0 or deta < 0 or dxi + deta > 3:
        raise ValueError(f"derivative order must satisfy 0 <= dxi+deta <= 3")
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    lam = spec.half_period
    c = spec.coeffs
    # linear mode w_0 * eta
    if dxi == 0 and deta == 0:
        out = c[0] * eta * np.ones_like(xi)
    elif dxi == 0 and deta == 1:
        out = c[0] * np.ones(np.broadcast_shapes(xi.shape, eta.shape))
    else:
        out = np.zeros(np.broadcast_shapes(xi.shape, eta.shape))
    if spec.M == 0:
        return out
    m = np.arange(1, spec.M + 1, dtype=float)
    a = m * (math.pi / lam)
    # d^dxi/dxi^dxi cos(a xi) = a^dxi cos(a xi + dxi pi/2)
    xpart = np.cos(np.multiply.outer(xi, a) + 0.5 * math.pi * dxi)
    ypart = _sinh_ratio(m, eta[..., None] if eta.ndim else eta, lam, deta % 2)
    weights = c[1:] * a ** (dxi + deta)
    return out + (xpart * ypart) @ weights


def surface_traces(spec: SurfaceSpectrum, grid):
    """(w, w_xi, w_eta) on eta = 1 at the given xi nodes."""
    grid = np.asarray(grid, dtype=float)
    lam = spec.half_period
    c = spec.coeffs
    w = np.full_like(grid, c[0])
    w_xi = np.zeros_like(grid)
    w_eta = np.full_like(grid, c[0])
    if spec.M == 0:
        return w, w_xi, w_eta
    m = np.arange(1, spec.M + 1, dtype=float)
    a = m * (math.pi / lam)
    coth = (1.0 + np.exp(-2.0 * a)) / (-np.expm1(-2.0 * a))
    arg = np.multiply.outer(grid, a)
    cosm = np.cos(arg)
    sinm = np.sin(arg)
    w = w + cosm @ c[1:]
    w_xi = w_xi - sinm @ (a * c[1:])
    w_eta = w_eta + cosm @ (a * coth * c[1:])
    return w, w_xi, w_eta


def conformal_map(spec: SurfaceSpectrum, zeta, deriv_order=0):
    """The conformal map f(zeta) or one of its derivatives (order <= 3).

    Uses sin(m pi zeta/lam + k pi/2)/sinh(m pi/lam) written with
    non-positive exponents throughout the closed strip |Im zeta| <= 1.
    """
    if not 0 <= deriv_order <= 3:
        raise ValueError("deriv_order must be between 0 and 3")
    z = np.asarray(zeta, dtype=complex)
    lam = spec.half_period
    c = spec.coeffs
    if deriv_order == 0:
        out = (1.0 + c[0]) * z
    elif deriv_order == 1:
        out = (1.0 + c[0]) * np.ones_like(z)
    else:
        out = np.zeros_like(z)
    if spec.M == 0:
        return out
    m = np.arange(1, spec.M + 1, dtype=float)
    a = m * (math.pi / lam)
    eta = np.imag(z)[..., None]
    E1 = np.exp(1j * np.multiply.outer(np.real(z), a) - a * (1.0 + eta))
    E2 = np.exp(-1j * np.multiply.outer(np.real(z), a) - a * (1.0 - eta))
    rot = 1j ** deriv_order
    # sin^{(k)}(u) = (i^k e^{iu} - (-i)^k e^{-iu}) / (2i); the 1/sinh factor
    # combines with the exponentials to E1, E2 above
    num = rot * E1 - np.conj(rot) * E2
    denom = 1j * (-np.expm1(-2.0 * a))
    weights = c[1:] * a ** deriv_order
    return out + (num / denom) @ weights


def injectivity_check(spec: SurfaceSpectrum, n_samples=512):
    """Diagnostics for injectivity of the map on the closed half-strip.

    Returns {"min_fz": min |f_zeta| over a sample grid of [0, lam] x [0, 1],
    "self_intersecting": whether the surface polyline over one period
    self-intersects}.
    """
    lam = spec.half_period
    xi = np.linspace(0.0, lam, n_samples)
    eta = np.linspace(0.0, 1.0, max(8, n_samples // 16))
    zz = xi[None, :] + 1j * eta[:, None]
    fz = conformal_map(spec, zz, deriv_order=1)
    min_fz = float(np.min(np.abs(fz)))
    xs = np.linspace(-lam, lam, 2 * n_samples)
    surf = conformal_map(spec, xs + 1j)
    line = LineString(np.column_stack([surf.real, surf.imag]))
    return {"min_fz": min_fz, "self_intersecting": not line.is_simple}
