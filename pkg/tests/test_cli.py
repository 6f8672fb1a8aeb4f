"""Tests for the command-line driver."""

import json
import math
import os

import numpy as np
import pytest

from vortexwave.cli import main


def run(argv):
    try:
        return main(argv)
    except SystemExit as exc:  # argparse errors
        return exc.code


class TestUsageErrors:
    def test_both_delta_and_froude(self, tmp_path, capsys):
        code = run(["sweep", "--delta", "0", "--froude", "2",
                    "--lambda", "5", "-M", "64", "--outdir", str(tmp_path)])
        assert code == 2

    def test_neither_delta_nor_froude(self, tmp_path):
        code = run(["sweep", "--lambda", "5", "-M", "64",
                    "--outdir", str(tmp_path)])
        assert code == 2

    def test_bad_m(self, tmp_path):
        for m in ("8", "100", "8192"):
            code = run(["sweep", "--delta", "0", "--lambda", "5", "-M", m,
                        "--outdir", str(tmp_path)])
            assert code == 2

    def test_negative_froude(self, tmp_path):
        code = run(["sweep", "--froude", "-2", "--lambda", "5", "-M", "64",
                    "--outdir", str(tmp_path)])
        assert code == 2

    def test_unknown_suite(self):
        assert run(["validate", "--only", "nonsense"]) == 2

    def test_hollow_needs_one_source(self, tmp_path):
        code = run(["hollow", "--rho", "0.01", "--outdir", str(tmp_path)])
        assert code == 2


class TestSweep:
    def test_small_run_outputs(self, tmp_path, capsys):
        code = run(["sweep", "--delta", "0.25", "--lambda", "5", "-M", "32",
                    "--outdir", str(tmp_path), "--max-steps", "8",
                    "--milestone-every", "4"])
        assert code == 0
        assert (tmp_path / "curve.jsonl").exists()
        assert (tmp_path / "curve_summary.csv").exists()
        assert (tmp_path / "point_0000_surface.csv").exists()
        # config echo embedded in the summary
        first = (tmp_path / "curve_summary.csv").read_text().splitlines()[0]
        assert first.startswith("# ")
        doc = json.loads(first[2:])
        assert doc["M"] == 32 and doc["schema_version"] == 1

    def test_froude_flag(self, tmp_path):
        code = run(["sweep", "--froude", "2", "--lambda", "5", "-M", "32",
                    "--outdir", str(tmp_path), "--max-steps", "3"])
        assert code == 0
        first = (tmp_path / "curve_summary.csv").read_text().splitlines()[0]
        assert json.loads(first[2:])["froude"] == 2.0

    def test_config_file_flags_win(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"delta": 0.25, "lam": 5.0, "M": 32,
                                   "max_steps": 3}))
        out = tmp_path / "out"
        code = run(["--config", str(cfg), "sweep", "-M", "16",
                    "--outdir", str(out)])
        assert code == 0
        first = (out / "curve_summary.csv").read_text().splitlines()[0]
        doc = json.loads(first[2:])
        assert doc["M"] == 16           # flag wins
        assert doc["delta"] == 0.25     # config fills the rest

    def test_deterministic_with_no_meta(self, tmp_path):
        args = ["sweep", "--delta", "0.25", "--lambda", "5", "-M", "32",
                "--max-steps", "3", "--no-meta"]
        run(args + ["--outdir", str(tmp_path / "a")])
        run(args + ["--outdir", str(tmp_path / "b")])
        a = (tmp_path / "a" / "curve.jsonl").read_bytes()
        b = (tmp_path / "b" / "curve.jsonl").read_bytes()
        assert a == b


class TestValidate:
    def test_all_suites_pass(self, capsys):
        assert run(["validate"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert "0 failure(s)" in out

    def test_only_filter(self, capsys):
        assert run(["validate", "--only", "exact-family"]) == 0
        out = capsys.readouterr().out
        assert "[exact-family]" in out
        assert "[solver]" not in out

    def test_fault_injection_detected(self, capsys):
        import vortexwave.potentials as pot
        try:
            code = run(["validate", "--only", "potentials",
                        "--inject-fault", "flip_a_periodic_sign"])
        finally:
            pot.FAULT_HOOKS["flip_a_periodic_sign"] = False
        assert code == 1
        out = capsys.readouterr().out
        failing = [l for l in out.splitlines() if l.startswith("FAIL")]
        assert len(failing) == 1
        assert "a_periodic" in failing[0]


@pytest.fixture(scope="module")
def curve_file(tmp_path_factory):
    d = tmp_path_factory.mktemp("curve")
    run(["sweep", "--delta", "0.25", "--lambda", "5", "-M", "32",
         "--outdir", str(d), "--max-steps", "6"])
    return d / "curve.jsonl"


class TestTraceCommand:

    def test_trivial_point_horizontal_lines(self, curve_file, tmp_path):
        code = run(["trace", "--input", str(curve_file), "--index", "0",
                    "--outdir", str(tmp_path), "--n-seeds", "2"])
        assert code == 0
        rows = (tmp_path / "trace_streamlines.csv").read_text().splitlines()
        data = [r.split(",") for r in rows[2:]]
        ys = {}
        for x, y, label in data:
            ys.setdefault(label, []).append(float(y))
        for label, vals in ys.items():
            assert max(vals) - min(vals) < 1e-12

    def test_missing_file(self, tmp_path):
        code = run(["trace", "--input", str(tmp_path / "nope.jsonl"),
                    "--outdir", str(tmp_path)])
        assert code == 2


class TestHollowCommand:
    def test_exact_base_centroid(self, tmp_path):
        code = run(["hollow", "--beta", "0.25", "--rho", "0.01",
                    "--outdir", str(tmp_path)])
        assert code == 0
        doc = json.loads((tmp_path / "hollow_rho0.01.json").read_text())
        import vortexwave.hollow as hv
        expected = hv.centroid(hv.PointVortexBase.from_exact(0.25), 0.01)
        assert doc["centroid"][0] == pytest.approx(expected.real, rel=1e-12)
        assert doc["gamma_rho"] == pytest.approx(-3.882250993908563, rel=1e-12)


class TestAsymCommand:
    def test_matches_oracles(self, tmp_path):
        code = run(["asym", "--froude", "2", "--beta", "0.05",
                    "--outdir", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "asym.csv").read_text().splitlines()
        vals = dict(zip(lines[1].split(","), lines[2].split(",")))
        from vortexwave.oracles import small_amplitude_prediction
        pred = small_amplitude_prediction(0.05, 4.0)
        assert float(vals["kappa"]) == pytest.approx(pred["kappa"], rel=1e-10)
        assert float(vals["gamma"]) == pytest.approx(pred["gamma"], rel=1e-10)
        assert float(vals["b"]) == pytest.approx(pred["b"], rel=1e-10)

    def test_rejects_zero_gravity(self, tmp_path):
        code = run(["asym", "--delta", "0", "--beta", "0.05",
                    "--outdir", str(tmp_path)])
        assert code == 2
