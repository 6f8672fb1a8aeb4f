"""Complex potentials for a point vortex in a strip.

Solitary (infinite) strip and 2*lambda-periodic channel configurations.
The periodic potential is built from the Weierstrass sigma/zeta functions
on the rectangular lattice 2*lambda*Z x 2i*Z, evaluated through rapidly
convergent q-series with nome q = exp(-pi*lambda).

Conventions
-----------
The conformal variable is zeta = xi + i*eta with the fluid strip
0 <= eta <= 1; the vortex sits at i*beta, its image at -i*beta.  The
relative complex potential W satisfies Im W = 0 on eta = 0, Im W = 1 on
eta = 1, and has circulation gamma around the vortex:
(1/2*pi*i) * contour_integral(W_zeta) = gamma / (2*pi*i), i.e.
contour_integral(W_zeta d zeta) = gamma.  (The normalization is fixed by
contour quadrature in the test suite.)
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AdmissibilityError",
    "PoleError",
    "DegenerateConfigurationError",
    "VortexConfig",
    "gamma_solitary",
    "lattice_sum_S",
    "gamma_periodic",
    "a_solitary",
    "a_fourier_weights",
    "a_periodic",
    "weierstrass_zeta",
    "weierstrass_eta1",
    "weierstrass_zeta_half_periods",
    "log_sigma_ratio",
    "complex_potential",
    "solitary_laurent_coeffs",
]


class AdmissibilityError(ValueError):
    """A (kappa, beta, lambda) triple violates the admissibility inequality."""


class PoleError(ValueError):
    """Evaluation point coincides with (or is too close to) a pole."""


class DegenerateConfigurationError(ValueError):
    """The circulation relation degenerates (vanishing denominator)."""


# Test hook: validation suites flip entries here to confirm that the
# dependent oracle checks (and only those) fail.  Never set in library code.
FAULT_HOOKS = {"flip_a_periodic_sign": False}


@dataclass(frozen=True)
class VortexConfig:
    """Circulation gamma, conformal altitude beta, optional half-period."""

    gamma: float
    beta: float
    half_period: float | None = None

    def __post_init__(self):
        if not abs(self.beta) < 1:
            raise AdmissibilityError(f"|beta| < 1 required, got beta={self.beta}")
        if self.half_period is not None and not self.half_period > 0:
            raise ValueError(f"half_period must be positive, got {self.half_period}")
        s = self.gamma * math.sin(math.pi * self.beta)
        if s > 0:
            raise AdmissibilityError(
                f"gamma*sin(pi*beta) must be <= 0, got {s} "
                f"(gamma={self.gamma}, beta={self.beta})"
            )
        if s == 0 and self.beta != 0 and self.gamma != 0:
            raise AdmissibilityError(
                "gamma*sin(pi*beta) = 0 requires beta = 0 or gamma = 0"
            )


def gamma_solitary(kappa, beta):
    """Circulation gamma = -4 sin(pi b) / (cos(pi b) - kappa sin(pi b)).

    The denominator must be positive (admissibility); this prevents
    degeneracy of the solitary formulation.
    """
    sb = math.sin(math.pi * beta)
    cb = math.cos(math.pi * beta)
    denom = cb - kappa * sb
    if not denom > 0:
        raise AdmissibilityError(
            f"cos(pi*beta) - kappa*sin(pi*beta) = {denom} <= 0 "
            f"(kappa={kappa}, beta={beta})"
        )
    return -4.0 * sb / denom


def lattice_sum_S(beta, lam, tol=1e-16):
    """S(beta, lambda) = cot(pi*beta)/4 + sum_k sin(2k*pi*beta)/(e^{2k*pi*lam}-1).

    Finite-lambda correction to the solitary circulation relation.  The
    series is truncated when the geometric tail bound drops below tol.
    """
    if beta == 0:
        raise DegenerateConfigurationError("lattice_sum_S undefined at beta = 0")
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    s = 0.25 / math.tan(math.pi * beta)
    r = math.exp(-2.0 * math.pi * lam)
    k, term_bound = 1, r
    while term_bound / (1.0 - r) > tol and k < 100000:
        s += math.sin(2.0 * k * math.pi * beta) / math.expm1(2.0 * k * math.pi * lam)
        k += 1
        term_bound *= r
    return s


def gamma_periodic(kappa, beta, lam, tol=1e-13):
    """Periodic circulation gamma = 4 / (kappa - 4 S(beta, lambda)).

    Vanishes (by interpretation) at beta = 0.  Admissibility requires the
    denominator to be negative for beta in (0,1) and positive for beta in
    (-1,0), the finite-lambda analog of the solitary inequality.
    """
    if beta == 0:
        return 0.0
    denom = kappa - 4.0 * lattice_sum_S(beta, lam)
    if abs(denom) < tol:
        raise DegenerateConfigurationError(
            f"kappa - 4S = {denom} within {tol} of zero (kappa={kappa}, "
            f"beta={beta}, lambda={lam})"
        )
    if beta > 0 and denom > 0:
        raise AdmissibilityError(
            f"kappa - 4S = {denom} > 0 with beta = {beta} > 0"
        )
    if beta < 0 and denom < 0:
        raise AdmissibilityError(
            f"kappa - 4S = {denom} < 0 with beta = {beta} < 0"
        )
    return 4.0 / denom


def a_solitary(xi, kappa, beta):
    """Surface coefficient a = 1 - (gamma/2) sin(pi b)/(cosh(pi xi) + cos(pi b)).

    Always >= 1, with equality iff beta = 0.
    """
    g = gamma_solitary(kappa, beta)
    xi = np.asarray(xi, dtype=float)
    # cosh overflows for |xi| > ~230; the vortex term is then exactly 0.
    t = np.minimum(np.abs(xi) * math.pi, 700.0)
    return 1.0 - 0.5 * g * math.sin(math.pi * beta) / (np.cosh(t) + math.cos(math.pi * beta))


def a_fourier_weights(beta, lam, tol=1e-17):
    """Weights r_k = sinh(k*pi*beta/lam)/sinh(k*pi/lam), k = 1..K.

    K is chosen from the geometric tail bound (e^{pi(|beta|-1)/lam})^k < tol.
    Evaluated in overflow-safe exponential form.
    """
    ab = abs(beta)
    if ab >= 1:
        raise AdmissibilityError(f"|beta| < 1 required, got {beta}")
    if ab == 0:
        return np.zeros(0)
    ratio = math.exp(math.pi * (ab - 1.0) / lam)
    K = max(8, int(math.ceil(math.log(tol * (1.0 - ratio)) / math.log(ratio))) + 1)
    k = np.arange(1, K + 1, dtype=float)
    sgn = 1.0 if beta > 0 else -1.0
    r = sgn * np.exp(k * math.pi * (ab - 1.0) / lam) \
        * (-np.expm1(-2.0 * k * math.pi * ab / lam)) \
        / (-np.expm1(-2.0 * k * math.pi / lam))
    return r


def a_periodic(xi, kappa, beta, lam, n_terms=None):
    """Periodic surface coefficient (Fourier cosine series).

    a(xi) = 1 - (gamma/2 lam) * (beta + 2 sum_k r_k cos(k pi xi / lam)),
    r_k = sinh(k pi beta/lam)/sinh(k pi/lam).  2*lambda-periodic, even.
    Truncation is automatic from the tail bound unless n_terms is given.
    """
    g = gamma_periodic(kappa, beta, lam)
    xi = np.asarray(xi, dtype=float)
    if g == 0.0:
        return np.ones_like(xi)
    r = a_fourier_weights(beta, lam)
    if n_terms is not None:
        r = r[:n_terms]
    k = np.arange(1, r.size + 1, dtype=float)
    series = np.cos(np.multiply.outer(xi, k) * (math.pi / lam)) @ r
    vortex_term = (g / (2.0 * lam)) * (beta + 2.0 * series)
    if FAULT_HOOKS["flip_a_periodic_sign"]:
        vortex_term = -vortex_term
    return 1.0 - vortex_term


# ---------------------------------------------------------------------------
# Weierstrass functions on the lattice 2*lambda*Z x 2i*Z.
#
# Half-periods are taken as omega1 = i and omega3 = -lambda, so that the
# lattice ratio tau = omega3/omega1 = i*lambda has positive imaginary part
# and the nome q = exp(i*pi*tau) = exp(-pi*lambda) is small for every
# lambda of interest.  The standard q-series (Lawden (6.2.8), (8.6.19);
# DLMF 23.8) then converge geometrically for |Re z| <= lambda, and the
# quasi-periodicity relations extend the evaluation to all of C.
# ---------------------------------------------------------------------------


def _eisenstein_e2(lam):
    """E2(q) = 1 - 24 sum n q^{2n}/(1-q^{2n}) with q = exp(-pi*lambda)."""
    q2 = math.exp(-2.0 * math.pi * lam)
    s, n, q2n = 0.0, 1, q2
    while q2n > 1e-18 and n < 10000:
        s += n * q2n / (1.0 - q2n)
        n += 1
        q2n *= q2
    return 1.0 - 24.0 * s


def weierstrass_eta1(lam):
    """eta1 = zeta_w(i) = -i*(pi^2/12)*E2(q), purely imaginary."""
    return -1j * (math.pi ** 2 / 12.0) * _eisenstein_e2(lam)


def weierstrass_zeta_half_periods(lam):
    """(zeta_w(lambda), zeta_w(i)).  zeta_w(lambda) = pi/2 - i*lambda*zeta_w(i)
    by the Legendre relation; both are used for quasi-period reductions."""
    eta1 = weierstrass_eta1(lam)
    eta_lam = 0.5 * math.pi - 1j * lam * eta1
    return eta_lam, eta1


def _reduce_re(z, lam):
    """Shift z by 2*lambda*k so that |Re z| <= lambda; returns (z', k)."""
    k = np.round(np.real(z) / (2.0 * lam))
    return z - 2.0 * lam * k, k


def weierstrass_zeta(z, lam, tol=1e-14, pole_eps=1e-12):
    """Weierstrass zeta function on the lattice 2*lambda*Z x 2i*Z.

    Odd, with simple poles (residue 1) at lattice points, and
    quasi-periods zeta_w(z + 2 lam) = zeta_w(z) + 2 zeta_w(lam),
    zeta_w(z + 2i) = zeta_w(z) + 2 zeta_w(i).
    """
    z = np.asarray(z, dtype=complex)
    eta_lam, eta1 = weierstrass_zeta_half_periods(lam)
    zr, k = _reduce_re(z, lam)
    # pole check against the remaining column of lattice points 2*i*Z
    j = np.round(np.imag(zr) / 2.0)
    if np.any(np.abs(zr - 2.0j * j) < pole_eps):
        raise PoleError("weierstrass_zeta evaluated at a lattice point")
    e2 = _eisenstein_e2(lam)
    out = -(math.pi ** 2 / 12.0) * e2 * zr + 0.5 * math.pi / np.tanh(0.5 * math.pi * zr)
    q2 = math.exp(-2.0 * math.pi * lam)
    n, q2n = 1, q2
    # terms are bounded by q^{2n} e^{n pi lam} = e^{-n pi lam} on |Re z|<=lam
    while q2n * math.exp(n * math.pi * lam) > tol and n < 10000:
        out = out - 2.0 * math.pi * (q2n / (1.0 - q2n)) * np.sinh(n * math.pi * zr)
        n += 1
        q2n *= q2
    return out + 2.0 * k * eta_lam


def log_sigma_ratio(z_minus, z_plus, lam, pole_eps=1e-12):
    """log sigma(z_minus) - log sigma(z_plus) on the lattice 2*lambda*Z x 2i*Z.

    Computed from the theta-product representation; the normalization
    constants of sigma cancel in the difference.  The real part (all that
    the stream function needs) is continuous away from the poles; the
    imaginary part may jump by multiples of 2*pi across branch cuts.
    """
    zm = np.asarray(z_minus, dtype=complex)
    zp = np.asarray(z_plus, dtype=complex)
    eta_lam, eta1 = weierstrass_zeta_half_periods(lam)
    # common real-period reduction (sigma quasi-periodicity; the parity
    # factors (-1)^k and the k^2 exponents cancel in the difference)
    k = np.round(np.real(zm + zp) / (4.0 * lam))
    zm = zm - 2.0 * lam * k
    zp = zp - 2.0 * lam * k
    for w in (zm, zp):
        jj = np.round(np.imag(w) / 2.0)
        kk = np.round(np.real(w) / (2.0 * lam))
        if np.any(np.abs(w - (2.0 * lam * kk + 2.0j * jj)) < pole_eps):
            raise PoleError("log_sigma_ratio evaluated at a lattice point")
    e2 = _eisenstein_e2(lam)
    out = -(math.pi ** 2 / 24.0) * e2 * (zm * zm - zp * zp)
    out = out + np.log(np.sinh(0.5 * math.pi * zm)) - np.log(np.sinh(0.5 * math.pi * zp))
    q2 = math.exp(-2.0 * math.pi * lam)
    chm = np.cosh(math.pi * zm)
    chp = np.cosh(math.pi * zp)
    n, q2n = 1, q2
    while q2n > 1e-18 and n < 10000:
        out = out + np.log1p(q2n * (q2n - 2.0 * chm)) - np.log1p(q2n * (q2n - 2.0 * chp))
        n += 1
        q2n *= q2
    return out + 2.0 * k * eta_lam * (zm - zp)


def complex_potential(zeta, cfg: VortexConfig, pole_eps=1e-10):
    """Relative complex potential W and derivative W_zeta at points zeta.

    Solitary case (cfg.half_period is None):
        W = (gamma/2 pi i) log(sinh(pi(z-ib)/2)/sinh(pi(z+ib)/2)) + z.
    Periodic case: the Weierstrass form, with
        W_zeta = (gamma/2 pi i)(zeta_w(z-ib) - zeta_w(z+ib) + 2 b zeta_w(i)) + 1.

    Im W = 0 on eta = 0, Im W = 1 on eta = 1; W_zeta is real on both axes.
    """
    z = np.asarray(zeta, dtype=complex)
    g, b, lam = cfg.gamma, cfg.beta, cfg.half_period
    if g == 0.0:
        return z.copy(), np.ones_like(z)
    coef = g / (2.0j * math.pi)
    if lam is None:
        if np.any(np.abs(z - 1j * b) < pole_eps) or np.any(np.abs(z + 1j * b) < pole_eps):
            raise PoleError("complex_potential evaluated at a vortex point")
        zm = 0.5 * math.pi * (z - 1j * b)
        zp = 0.5 * math.pi * (z + 1j * b)
        W = coef * (np.log(np.sinh(zm)) - np.log(np.sinh(zp))) + z
        Wz = coef * 0.5 * math.pi * (1.0 / np.tanh(zm) - 1.0 / np.tanh(zp)) + 1.0
        return W, Wz
    zr, k = _reduce_re(z, lam)
    if np.any(np.abs(zr - 1j * b) < pole_eps) or np.any(np.abs(zr + 1j * b) < pole_eps):
        raise PoleError("complex_potential evaluated at a vortex point")
    eta_lam, eta1 = weierstrass_zeta_half_periods(lam)
    W = coef * (log_sigma_ratio(zr - 1j * b, zr + 1j * b, lam) + 2.0 * b * eta1 * zr) \
        + zr + k * (2.0 * lam - g * b)
    Wz = coef * (weierstrass_zeta(zr - 1j * b, lam) - weierstrass_zeta(zr + 1j * b, lam)
                 + 2.0 * b * eta1) + 1.0
    return W, Wz


def solitary_laurent_coeffs(cfg: VortexConfig):
    """Laurent coefficients of the solitary W_zeta about the vortex i*beta.

    Returns (c_{-1}, c_0, c_1) with
        c_{-1} = gamma/(2 pi i),
        c_0    = 1 + (gamma/4) cot(pi beta),
        c_1    = -(pi gamma / 24 i) (2 + 3 cot^2(pi beta)).
    """
    if cfg.beta == 0:
        raise DegenerateConfigurationError("Laurent expansion requires beta != 0")
    g, b = cfg.gamma, cfg.beta
    cot = 1.0 / math.tan(math.pi * b)
    c_m1 = g / (2.0j * math.pi)
    c_0 = 1.0 + 0.25 * g * cot
    c_1 = -(math.pi * g / 24.0j) * (2.0 + 3.0 * cot * cot)
    return c_m1, c_0, c_1
