"""Tests for the leading-order hollow-vortex desingularization."""

import json
import math

import numpy as np
import pytest

import vortexwave.hollow as hv
import vortexwave.solver as sol


@pytest.fixture(scope="module")
def base25():
    return hv.PointVortexBase.from_exact(0.25)


@pytest.fixture(scope="module")
def base50():
    return hv.PointVortexBase.from_exact(0.5)


def polyline_centroid(boundary, rho):
    """(1/2 pi i) contour integral of f over the core circle, trapezoid rule."""
    n = len(boundary)
    tau = np.exp(2j * math.pi * np.arange(n) / n)
    return complex(np.mean(boundary * tau) * rho)


class TestPointVortexBase:
    def test_from_exact_equilibrium(self, base25):
        assert base25.kappa0 == pytest.approx(-0.03033008588991065, abs=1e-14)
        assert base25.gamma0 == pytest.approx(-3.882250993908563, rel=1e-13)

    def test_rejects_mispaired_kappa(self):
        from vortexwave.oracles import ExactZeroGravityWave, exact_map
        w = ExactZeroGravityWave(0.25)
        with pytest.raises(ValueError, match="equilibrium"):
            hv.PointVortexBase(map_fn=lambda z, k=0: exact_map(w, z, k),
                               kappa0=0.4, beta0=0.25, gamma0=-3.88)

    def test_from_solution(self):
        params = sol.WaveParams(delta=0.0, lam=20.0, M=256)
        settings = sol.ContinuationSettings(ds0=0.05, ds_max=1.0, max_steps=200,
                                            stop_beta=0.25,
                                            underres_threshold=None)
        rec = sol.continue_curve(sol.trivial_point(params), params, settings)
        base = hv.PointVortexBase.from_solution(rec.points[-1], params)
        assert base.beta0 == pytest.approx(0.25, abs=1e-10)
        # spectral and symbolic map providers agree on f_zzz at the vortex
        exact = hv.PointVortexBase.from_exact(0.25)
        f3_num = complex(base.map_fn(1j * 0.25, 3)).real
        f3_sym = complex(exact.map_fn(1j * 0.25, 3)).real
        assert f3_num == pytest.approx(f3_sym, rel=1e-5)


class TestLeadingParams:
    def test_gamma_unchanged(self, base25):
        assert hv.leading_params(base25, 0.01)["gamma_rho"] == base25.gamma0

    def test_q_frozen_value(self, base25):
        assert hv.leading_params(base25, 0.01)["q_rho"] == pytest.approx(
            2026.4232128897013, rel=1e-13)

    def test_q_closed_form(self, base50):
        rho = 0.02
        fz = complex(base50.map_fn(0.5j, 1)).real
        expected = base50.gamma0 ** 2 / (4 * fz ** 2 * rho ** 2) * (
            1 / math.pi ** 2 - rho ** 2 * base50.kappa0 ** 2 / 4)
        assert hv.leading_params(base50, rho)["q_rho"] == pytest.approx(
            expected, rel=1e-14)

    def test_q_scaling_rate_two(self, base25):
        # rho^2 q^rho deviates from its rho-independent leading value at O(rho^2)
        fz = complex(base25.map_fn(0.25j, 1)).real
        lead = base25.gamma0 ** 2 / (4 * fz ** 2 * math.pi ** 2)
        errs = [abs(hv.leading_params(base25, r)["q_rho"] * r ** 2 - lead)
                for r in (0.04, 0.02, 0.01)]
        rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(np.abs(rates - 2.0) < 0.5)

    def test_rho_zero_rejected(self, base25):
        with pytest.raises(ZeroDivisionError):
            hv.leading_params(base25, 0.0)


class TestMuDot:
    def test_frozen_value(self, base25):
        assert hv.mu_dot(base25) == pytest.approx(-10.998508670897733,
                                                  rel=1e-13)

    def test_closed_form(self, base50):
        fz = complex(base50.map_fn(0.5j, 1)).real
        fzzz = complex(base50.map_fn(0.5j, 3)).real
        s = 1.0  # csc(pi/2)
        expected = math.pi ** 2 * fz * ((1 - 3 * s ** 2) / 6
                                        - base50.kappa0 ** 2 / 4) - fzzz / 2
        assert hv.mu_dot(base50) == pytest.approx(expected, rel=1e-14)

    def test_csc_term_negative(self):
        for beta in (0.1, 0.5, 0.9):
            s = 1.0 / math.sin(math.pi * beta)
            assert (1 - 3 * s ** 2) / 6 < 0


class TestCentroid:
    def test_frozen_value(self, base25):
        assert hv.centroid(base25, 0.01) == pytest.approx(
            5.499254335448867e-06 + 0j, rel=1e-12)

    def test_real_by_symmetry(self, base25):
        assert abs(hv.centroid(base25, 0.03).imag) < 1e-10

    def test_odd_in_rho(self, base25):
        assert hv.centroid(base25, 0.02) == pytest.approx(
            -hv.centroid(base25, -0.02), abs=1e-16)

    def test_is_minus_half_mu_dot(self, base25):
        # the printed bracket equals -c/2 for the mu-dot coefficient c
        rho = 0.02
        assert hv.centroid(base25, rho) == pytest.approx(
            -rho ** 3 * hv.mu_dot(base25) / 2, rel=1e-13)


class TestCauchyOp:
    def test_constant_maps_to_zero(self):
        tau = np.exp(1j * np.linspace(0, 2, 5))
        assert np.max(np.abs(hv.cauchy_op({0: 3.0}, tau))) == 0.0

    def test_positive_modes_map_to_zero(self):
        tau = np.exp(0.4j)
        assert complex(hv.cauchy_op({2: 1.0, 5: -0.3}, tau)) == 0.0

    def test_against_quadrature(self):
        # mu(sigma) = Re sigma, evaluated at tau = 1 by direct quadrature
        n = 8192
        sig = np.exp(2j * math.pi * np.arange(n) / n)
        vals = np.empty_like(sig)
        vals[1:] = (np.real(sig[1:]) - 1.0) / (sig[1:] - 1.0)
        vals[0] = 0.5  # removable singularity at sigma = tau = 1
        quad = complex(np.mean(vals * sig))
        mode = complex(hv.cauchy_op({1: 0.5, -1: 0.5}, 1.0))
        assert mode == pytest.approx(quad, abs=1e-3)
        assert mode == pytest.approx(-0.5, abs=1e-15)

    def test_linearity(self):
        tau = np.exp(0.9j)
        a = complex(hv.cauchy_op({-1: 0.4}, tau))
        b = complex(hv.cauchy_op({-2: 0.7}, tau))
        ab = complex(hv.cauchy_op({-1: 0.4, -2: 0.7}, tau))
        assert ab == pytest.approx(a + b, abs=1e-15)


class TestLayerPotential:
    MU = {1: 0.3, -1: 0.3}

    def test_far_field_decay(self):
        v100 = abs(hv.layer_potential(self.MU, 0.01, 0.25, 100.0 + 0.5j))
        v200 = abs(hv.layer_potential(self.MU, 0.01, 0.25, 200.0 + 0.5j))
        assert v100 < 0.01
        assert v200 < 0.6 * v100

    def test_trace_limit(self):
        rho, beta = 1e-4, 0.25
        for t in (0.3, 1.1, 2.5):
            tau = np.exp(1j * t)
            tr = hv.layer_potential(self.MU, rho, beta, 1j * beta + rho * tau)
            co = complex(hv.cauchy_op(self.MU, tau))
            assert abs(tr - co) < 10 * rho

    def test_trace_formula(self):
        rho, beta = 0.01, 0.25
        tau = np.exp(0.7j)
        tr = hv.layer_potential(self.MU, rho, beta, 1j * beta + rho * tau)
        expected = complex(hv.cauchy_op(self.MU, tau)) \
            - rho * self.MU[1] / (2j * beta)
        assert tr == pytest.approx(expected, abs=1e-14)

    def test_inside_core_rejected(self):
        with pytest.raises(hv.DomainError):
            hv.layer_potential(self.MU, 0.01, 0.25, 0.25j + 0.001)

    def test_surface_trace_small(self):
        rho, beta = 0.01, 0.25
        vals = [abs(hv.layer_potential(self.MU, rho, beta, x + 1j))
                for x in np.linspace(-3, 3, 13)]
        assert max(vals) < 10 * rho * 0.6  # C * rho * ||mu||


class TestBoundaryApprox:
    def test_shrinks_to_point(self, base25):
        rho = 1e-4
        bdry = hv.boundary_approx(base25, rho, n_nodes=64)
        center = complex(base25.map_fn(0.25j, 0))
        fz = complex(base25.map_fn(0.25j, 1)).real
        diam = np.max(np.abs(bdry[:, None] - bdry[None, :]))
        assert np.max(np.abs(bdry - center)) < 2 * rho * abs(fz)
        assert diam == pytest.approx(2 * rho * abs(fz), rel=1e-3)

    def test_simple_for_small_rho(self, base25):
        approx = hv.hollow_approx(base25, 0.05, n_nodes=256)
        assert len(approx.boundary) == 256  # constructor ran the simplicity check

    def test_centroid_quadrature_coefficient(self, base25):
        # the contour quadrature of the approximate boundary recovers the
        # bracket coefficient -c/2 at order rho^4 (one power above the
        # printed rho^3 formula; see the acceptance analysis)
        c = hv.mu_dot(base25)
        for rho in (0.04, 0.02):
            quad = polyline_centroid(hv.boundary_approx(base25, rho, 512), rho)
            assert quad.real / rho ** 4 == pytest.approx(-c / 2, rel=1e-9)
            assert abs(quad.imag) < 1e-12


class TestHollowApprox:
    def test_json_round_trip(self, base25):
        approx = hv.hollow_approx(base25, 0.02, n_nodes=128)
        doc = json.loads(approx.to_json())
        assert set(doc) == {"rho", "gamma_rho", "q_rho", "centroid",
                            "mu_dot_coeff", "boundary"}
        assert doc["rho"] == 0.02
        assert doc["centroid"][0] == approx.centroid.real
        assert len(doc["boundary"]) == 128
