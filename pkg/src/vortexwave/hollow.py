"""Leading-order hollow-vortex desingularization of a point-vortex wave.

Given an equilibrium point-vortex configuration (conformal map f0, vortex
strength gamma0, position i*beta0, curvature parameter kappa0), replace the
point vortex by a constant-pressure core of conformal radius rho and
evaluate the closed-form leading-order data: the expanded circulation and
Bernoulli constant, the core centroid, the first boundary-correction
density, and the approximate core boundary.
"""

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import potentials as pot
from .oracles import ExactZeroGravityWave, exact_map, exact_params
from .solver import SolutionPoint, WaveParams
from .spectral import conformal_map

__all__ = [
    "DomainError",
    "SymmetryError",
    "PointVortexBase",
    "HollowVortexApprox",
    "leading_params",
    "mu_dot",
    "centroid",
    "cauchy_op",
    "layer_potential",
    "boundary_approx",
]


class DomainError(ValueError):
    """Evaluation point lies strictly inside a vortex core."""


class SymmetryError(ValueError):
    """A quantity that must be real by symmetry is not."""


@dataclass(frozen=True)
class PointVortexBase:
    """An equilibrium point-vortex wave used as the desingularization base.

    map_fn(zeta, deriv_order) evaluates f0 and its derivatives up to
    third order at arbitrary strip points.
    """

    map_fn: Callable
    kappa0: float
    beta0: float
    gamma0: float

    def __post_init__(self):
        if not 0.0 < self.beta0 < 1.0:
            raise ValueError(f"beta0 must lie in (0, 1), got {self.beta0}")
        z = 1j * self.beta0
        fz = complex(self.map_fn(z, 1))
        fzz = complex(self.map_fn(z, 2))
        if abs(fz) < 1e-12:
            raise ValueError("f_zeta(i beta0) vanishes")
        res = abs(fzz / fz - 1j * math.pi * self.kappa0)
        if res > 1e-6:
            raise ValueError(
                f"base is not an equilibrium: |f_zz/f_z - pi i kappa| = {res:.3e}")

    @staticmethod
    def from_exact(beta):
        """Base built from the exact zero-gravity wave at position beta."""
        wave = ExactZeroGravityWave(beta)
        par = exact_params(wave)
        return PointVortexBase(
            map_fn=lambda z, k=0: exact_map(wave, z, k),
            kappa0=par["kappa"], beta0=beta, gamma0=par["gamma"])

    @staticmethod
    def from_solution(point: SolutionPoint, params: WaveParams):
        """Base built from a computed solution point (large lambda)."""
        g = pot.gamma_periodic(point.kappa, point.beta, params.lam)
        return PointVortexBase(
            map_fn=lambda z, k=0: conformal_map(point.spec, z, k),
            kappa0=point.kappa, beta0=point.beta, gamma0=g)


@dataclass(frozen=True)
class HollowVortexApprox:
    """Leading-order hollow-vortex data at conformal radius rho."""

    rho: float
    gamma_rho: float
    q_rho: float
    centroid: complex
    mu_dot_coeff: float
    boundary: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.boundary, dtype=complex)
        object.__setattr__(self, "boundary", b)
        from shapely.geometry import LineString
        pts = np.column_stack([b.real, b.imag])
        ring = np.vstack([pts, pts[:1]])
        if not LineString(ring).is_simple:
            raise ValueError("core boundary polyline self-intersects")

    def to_json(self):
        return json.dumps({
            "rho": self.rho,
            "gamma_rho": self.gamma_rho,
            "q_rho": self.q_rho,
            "centroid": [self.centroid.real, self.centroid.imag],
            "mu_dot_coeff": self.mu_dot_coeff,
            "boundary": [[z.real, z.imag] for z in self.boundary],
        })


def _real_at_axis(value, what, tol=1e-10):
    v = complex(value)
    if abs(v.imag) > tol * max(1.0, abs(v.real)):
        raise SymmetryError(f"{what} should be real at i*beta, got {v}")
    return v.real


def leading_params(base: PointVortexBase, rho):
    """gamma^rho and q^rho at the truncation order of the expansion.

    q^rho diverges like 1/rho^2, so rho = 0 is rejected.
    """
    if rho == 0:
        raise ZeroDivisionError("q^rho diverges like 1/rho^2 at rho = 0")
    fz = _real_at_axis(base.map_fn(1j * base.beta0, 1), "f_zeta")
    g0, k0 = base.gamma0, base.kappa0
    q = g0 ** 2 / (4.0 * fz ** 2 * rho ** 2) * (
        1.0 / math.pi ** 2 - rho ** 2 * k0 ** 2 / 4.0)
    return {"gamma_rho": g0, "q_rho": q}


def mu_dot(base: PointVortexBase):
    """Coefficient c of the first boundary-correction density mu' = c Re tau."""
    z = 1j * base.beta0
    fz = _real_at_axis(base.map_fn(z, 1), "f_zeta")
    fzzz = _real_at_axis(base.map_fn(z, 3), "f_zetazetazeta")
    s = 1.0 / math.sin(math.pi * base.beta0)
    return (math.pi ** 2 * fz * ((1.0 - 3.0 * s ** 2) / 6.0
                                 - base.kappa0 ** 2 / 4.0)
            - fzzz / 2.0)


def centroid(base: PointVortexBase, rho):
    """Leading rho^3 term of the core centroid (1/2 pi i) contour f."""
    z = 1j * base.beta0
    fz = _real_at_axis(base.map_fn(z, 1), "f_zeta")
    fzzz = _real_at_axis(base.map_fn(z, 3), "f_zetazetazeta")
    s = 1.0 / math.sin(math.pi * base.beta0)
    val = rho ** 3 * (math.pi ** 2 * fz * (base.kappa0 ** 2 / 8.0
                                           - (1.0 - 3.0 * s ** 2) / 12.0)
                      + fzzz / 4.0)
    return complex(val)


def _mu_eval(mu_coeffs, sigma):
    """Evaluate mu(sigma) = sum_m mu_m sigma^m for a mode-coefficient dict."""
    sigma = np.asarray(sigma, dtype=complex)
    out = np.zeros_like(sigma)
    for m, cm in mu_coeffs.items():
        out = out + cm * sigma ** m
    return out


def cauchy_op(mu_coeffs, tau):
    """The Cauchy-type operator C mu(tau) = (1/2 pi i) int (mu(s)-mu(tau))/(s-tau) ds.

    Modewise: sigma^m maps to -tau^m for m < 0 and to 0 for m >= 0
    (residue calculus at the origin; certified against direct quadrature
    in the test suite).
    """
    tau = np.asarray(tau, dtype=complex)
    out = np.zeros_like(tau)
    for m, cm in mu_coeffs.items():
        if m < 0:
            out = out - cm * tau ** m
    return out


def layer_potential(mu_coeffs, rho, beta, zeta, n_quad=4096, on_tol=1e-9):
    """The layer potential Z^rho[mu](zeta) by direct contour quadrature.

    Z^rho[mu](zeta) = (1/2 pi i) int [mu(s)/(rho s + i beta - zeta)
                                      + mu(conj s)/(rho s - i beta - zeta)] rho ds

    over the unit circle.  Points strictly inside either core circle are
    rejected; points on the vortex circle use the Sokhotski-Plemelj trace
    C mu(tau) - rho mu_1/(2 i beta).
    """
    z = complex(zeta)
    d_up = abs(z - 1j * beta)
    d_dn = abs(z + 1j * beta)
    r = abs(rho)
    if abs(d_up - r) <= on_tol * max(1.0, r):
        tau = (z - 1j * beta) / rho
        mu1 = mu_coeffs.get(1, 0.0)
        return complex(cauchy_op(mu_coeffs, tau)) - rho * mu1 / (2j * beta)
    if d_up < r or d_dn < r:
        raise DomainError(
            f"zeta = {z} lies inside a vortex core of radius {r}")
    theta = 2.0 * math.pi * np.arange(n_quad) / n_quad
    sig = np.exp(1j * theta)
    integrand = (_mu_eval(mu_coeffs, sig) / (rho * sig + 1j * beta - z)
                 + _mu_eval(mu_coeffs, np.conj(sig)) / (rho * sig - 1j * beta - z))
    # ds = i sigma dtheta; the 1/(2 pi i) absorbs the i
    return complex(rho * np.mean(integrand * sig))


def boundary_approx(base: PointVortexBase, rho, n_nodes=512):
    """Approximate core boundary f0(i beta + rho tau_j) + rho^2 Z[rho mu'].

    tau_j are uniform on the unit circle; the layer-potential term uses
    its on-boundary trace with the leading density mu = rho * mu'.
    """
    c = mu_dot(base)
    mu_coeffs = {1: rho * c / 2.0, -1: rho * c / 2.0}
    theta = 2.0 * math.pi * np.arange(n_nodes) / n_nodes
    tau = np.exp(1j * theta)
    zeta = 1j * base.beta0 + rho * tau
    f0 = base.map_fn(zeta, 0)
    layer = np.array([
        layer_potential(mu_coeffs, rho, base.beta0, z) for z in zeta])
    return f0 + rho ** 2 * layer


def hollow_approx(base: PointVortexBase, rho, n_nodes=512):
    """Full HollowVortexApprox record at conformal radius rho."""
    lp = leading_params(base, rho)
    return HollowVortexApprox(
        rho=float(rho),
        gamma_rho=lp["gamma_rho"],
        q_rho=lp["q_rho"],
        centroid=centroid(base, rho),
        mu_dot_coeff=mu_dot(base),
        boundary=boundary_approx(base, rho, n_nodes),
    )
