"""Tests for the collocation residual, Jacobian, and continuation engine."""

import json
import math

import numpy as np
import pytest

import vortexwave.solver as sol
from vortexwave.spectral import SurfaceSpectrum, conformal_map


PARAMS = sol.WaveParams(delta=0.25, lam=5.0, M=32)


class TestTrivialPoint:
    def test_residual_exactly_zero(self):
        pt = sol.trivial_point(PARAMS)
        r = sol.residual(pt, PARAMS)
        assert r.shape == (PARAMS.M + 3,)
        assert np.max(np.abs(r)) == 0.0

    def test_fields(self):
        pt = sol.trivial_point(PARAMS)
        assert pt.beta == 0.0 and pt.kappa == 0.0 and pt.Q == 0.0
        assert np.all(pt.spec.coeffs == 0.0)


class TestProjection:
    def test_round_trip(self):
        rng = np.random.default_rng(4)
        c = 0.01 * rng.standard_normal(PARAMS.M + 1) / np.arange(1, PARAMS.M + 2)
        spec = SurfaceSpectrum(c, PARAMS.lam)
        xi = sol.collocation_nodes(PARAMS)
        m = np.arange(PARAMS.M + 1)
        vals = np.cos(np.outer(xi, m * math.pi / PARAMS.lam)) @ c
        back = sol.project_surface(vals, PARAMS)
        assert np.max(np.abs(back - c)) < 1e-14


class TestResidualStructure:
    def test_kappa_enters_only_through_advection_and_a(self):
        # at the trivial point, gamma stays 0 when kappa moves, so the
        # only nonzero residual entry is the advection row, exactly -pi*h
        pt = sol.trivial_point(PARAMS)
        theta = pt.theta()
        theta[-2] = 1e-3
        r = sol.residual(sol.SolutionPoint.from_theta(theta, PARAMS.lam), PARAMS)
        assert r[-2] == pytest.approx(-math.pi * 1e-3, abs=1e-16)
        r[-2] = 0.0
        assert np.max(np.abs(r)) == 0.0

    def test_q_column_is_minus_one(self):
        pt = sol.trivial_point(PARAMS)
        theta = pt.theta()
        theta[-3] = 0.5
        r = sol.residual(sol.SolutionPoint.from_theta(theta, PARAMS.lam), PARAMS)
        assert np.max(np.abs(r[:PARAMS.M + 1] + 0.5)) < 1e-15


class TestJacobian:
    def test_matches_central_differences(self):
        rng = np.random.default_rng(9)
        theta = np.zeros(PARAMS.M + 4)
        theta[:PARAMS.M + 1] = 1e-3 * rng.standard_normal(PARAMS.M + 1) \
            / np.arange(1, PARAMS.M + 2) ** 2
        theta[-3:] = [0.01, -0.02, 0.15]
        pt = sol.SolutionPoint.from_theta(theta, PARAMS.lam)
        J = sol.jacobian(pt, PARAMS)
        h = 1e-6
        cols = []
        for i in range(len(theta)):
            tp, tm = theta.copy(), theta.copy()
            tp[i] += h
            tm[i] -= h
            rp = sol.residual(sol.SolutionPoint.from_theta(tp, PARAMS.lam), PARAMS)
            rm = sol.residual(sol.SolutionPoint.from_theta(tm, PARAMS.lam), PARAMS)
            cols.append((rp - rm) / (2 * h))
        Jfd = np.column_stack(cols)
        scale = max(1.0, float(np.max(np.abs(Jfd))))
        assert np.max(np.abs(J - Jfd)) / scale < 1e-5

    def test_shape(self):
        J = sol.jacobian(sol.trivial_point(PARAMS), PARAMS)
        assert J.shape == (PARAMS.M + 3, PARAMS.M + 4)


class TestNewtonCorrect:
    def test_converges_near_trivial(self):
        pt = sol.trivial_point(PARAMS)
        anchor = pt.theta()
        normal = np.zeros(PARAMS.M + 4)
        normal[-1] = 1.0
        anchor[-1] = 0.02  # pin beta slightly off zero
        point, info = sol.newton_correct(anchor, (anchor, normal), PARAMS)
        assert info["residual_norm"] < 1e-10
        assert point.beta == pytest.approx(0.02, abs=1e-14)
        assert point.kappa < 0.0  # kappa turns negative with the vortex on

    def test_nonconvergence_raises(self):
        anchor = sol.trivial_point(PARAMS).theta()
        anchor[-1] = 0.45  # far from the curve; two iterations cannot make it
        normal = np.zeros(PARAMS.M + 4)
        normal[-1] = 1.0
        with pytest.raises(sol.NonconvergenceError):
            sol.newton_correct(anchor, (anchor, normal), PARAMS, max_iter=2)


class TestTangent:
    def test_trivial_tangent_is_beta_direction(self):
        pt = sol.trivial_point(PARAMS)
        t = sol.tangent(pt, PARAMS)
        assert abs(t[-1]) > 0.999
        # off-beta components sit at the one-sided FD noise floor (~sqrt(eps))
        assert np.max(np.abs(t[:-1])) < 1e-6

    def test_unit_norm(self):
        t = sol.tangent(sol.trivial_point(PARAMS), PARAMS)
        assert np.linalg.norm(t) == pytest.approx(1.0, abs=1e-13)


class TestContinuation:
    def test_short_run_accepts_points(self):
        settings = sol.ContinuationSettings(ds0=0.02, max_steps=5,
                                            underres_threshold=None)
        rec = sol.continue_curve(sol.trivial_point(PARAMS), PARAMS, settings)
        assert len(rec.points) == 6
        assert rec.stop_reason == "max_steps"
        betas = [p.beta for p in rec.points]
        assert all(b2 > b1 for b1, b2 in zip(betas, betas[1:]))
        for pt in rec.points[1:]:
            assert float(np.max(np.abs(sol.residual(pt, PARAMS)))) < 1e-9

    def test_stop_beta_landing(self):
        settings = sol.ContinuationSettings(ds0=0.05, max_steps=40,
                                            stop_beta=0.12)
        rec = sol.continue_curve(sol.trivial_point(PARAMS), PARAMS, settings)
        assert rec.stop_reason == "stop_beta"
        assert rec.points[-1].beta == pytest.approx(0.12, abs=1e-10)

    def test_matches_small_amplitude_kappa(self):
        from vortexwave.oracles import small_amplitude_prediction
        params = sol.WaveParams(delta=0.25, lam=10.0, M=128)
        settings = sol.ContinuationSettings(ds0=0.02, max_steps=60,
                                            stop_beta=0.05)
        rec = sol.continue_curve(sol.trivial_point(params), params, settings)
        pt = rec.points[-1]
        pred = small_amplitude_prediction(pt.beta, 1.0 / params.delta)
        assert pt.kappa == pytest.approx(pred["kappa"], rel=0.05)

    def test_diagnostics_recorded(self):
        settings = sol.ContinuationSettings(ds0=0.02, max_steps=3)
        rec = sol.continue_curve(sol.trivial_point(PARAMS), PARAMS, settings)
        for d in rec.diagnostics:
            assert "min_fz" in d and "monotone" in d and "gamma" in d
        assert len(rec.steps) == len(rec.points) - 1
        assert rec.arclengths()[-1] == pytest.approx(sum(rec.steps))


class TestSerialization:
    def test_jsonl_round_trip(self, tmp_path):
        settings = sol.ContinuationSettings(ds0=0.02, max_steps=3)
        rec = sol.continue_curve(sol.trivial_point(PARAMS), PARAMS, settings)
        path = tmp_path / "curve.jsonl"
        rec.to_jsonl(path)
        back = sol.CurveRecord.from_jsonl(path)
        assert back.params == rec.params
        assert len(back.points) == len(rec.points)
        assert back.stop_reason == rec.stop_reason
        for a, b in zip(rec.points, back.points):
            assert np.array_equal(a.spec.coeffs, b.spec.coeffs)
            assert (a.Q, a.kappa, a.beta) == (b.Q, b.kappa, b.beta)
        assert back.steps == pytest.approx(rec.steps)

    def test_schema_version_mismatch(self, tmp_path):
        pt = sol.trivial_point(PARAMS)
        doc = pt.to_doc(PARAMS)
        doc["schema_version"] = sol.SCHEMA_VERSION + 1
        with pytest.raises(ValueError, match="[Ss]chema"):
            sol.SolutionPoint.from_doc(doc)

    def test_no_meta_omits_header(self, tmp_path):
        settings = sol.ContinuationSettings(ds0=0.02, max_steps=2)
        rec = sol.continue_curve(sol.trivial_point(PARAMS), PARAMS, settings)
        path = tmp_path / "c.jsonl"
        rec.to_jsonl(path, meta=False)
        first = json.loads(path.read_text().splitlines()[0])
        assert first.get("kind") != "curve_meta"
