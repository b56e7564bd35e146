"""Exit codes, output formats, determinism, and file round-trips of the front end."""

import csv
import io
import json

import numpy as np
import pytest
from scipy.special import eval_gegenbauer as scipy_gegenbauer

from spherekern.cli import main, parse_angle


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExitCodes:
    def test_lp_bound_passes(self, capsys):
        code, out, _ = run(capsys, "lp-bound", "--n", "8", "--theta", "60deg",
                           "--dmax", "12", "--no-timestamp")
        assert code == 0
        doc = json.loads(out)
        assert doc["schema"] == 1
        assert abs(doc["bound"] - 240.0) < 0.5

    def test_check_pd_failure_carries_witness(self, capsys):
        code, out, _ = run(capsys, "check-pd", "--kernel", "neg-dot", "--n", "3",
                           "--trials", "3", "--m", "8", "--no-timestamp")
        assert code == 1
        doc = json.loads(out)
        assert doc["passed"] is False
        witnesses = [r for r in doc["reports"] if "witness_points" in r]
        assert witnesses
        pts = np.asarray(witnesses[0]["witness_points"], dtype=float)
        assert pts.shape[1] == 3

    def test_non_invariant_kernel_fails_expand(self, capsys):
        code, out, _ = run(capsys, "expand", "--kernel", "coord", "--n", "3",
                           "--no-timestamp")
        assert code == 1
        doc = json.loads(out)
        assert doc["passed"] is False
        assert "error" in doc

    def test_bad_theta_is_usage_error(self, capsys):
        code, _, err = run(capsys, "lp-bound", "--n", "3", "--theta", "0", "--dmax", "6")
        assert code == 2
        assert "error" in err

    def test_unknown_kernel_is_usage_error(self, capsys):
        code, _, err = run(capsys, "check-pd", "--kernel", "mystery", "--n", "3")
        assert code == 2
        assert "error" in err

    def test_malformed_flags(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["lp-bound", "--n", "3", "--theta", "sixty"])
        assert exc.value.code == 2

    def test_missing_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2


class TestAngles:
    def test_degrees_suffix(self):
        assert parse_angle("60deg") == pytest.approx(np.pi / 3, abs=1e-15)
        assert parse_angle("90DEG") == pytest.approx(np.pi / 2, abs=1e-15)

    def test_radians(self):
        assert parse_angle("1.0471975511965976") == pytest.approx(np.pi / 3, abs=1e-15)

    def test_deg_equals_radians_downstream(self, capsys):
        _, out_deg, _ = run(capsys, "lp-bound", "--n", "3", "--theta", "60deg",
                            "--dmax", "8", "--no-timestamp")
        _, out_rad, _ = run(capsys, "lp-bound", "--n", "3", "--theta",
                            repr(np.pi / 3), "--dmax", "8", "--no-timestamp")
        assert json.loads(out_deg)["bound"] == json.loads(out_rad)["bound"]


class TestDeterminism:
    def test_byte_identical_json(self, capsys):
        argv = ["check-pd", "--kernel", "dot", "--n", "4", "--trials", "5",
                "--m", "10", "--seed", "42", "--no-timestamp"]
        _, out1, _ = run(capsys, *argv)
        _, out2, _ = run(capsys, *argv)
        assert out1 == out2

    def test_seed_recorded(self, capsys):
        _, out, _ = run(capsys, "gegenbauer", "--alpha", "1.0", "--dmax", "3",
                        "--t", "0.5", "--seed", "7", "--no-timestamp")
        assert json.loads(out)["seed"] == 7

    def test_env_seed(self, capsys, monkeypatch):
        monkeypatch.setenv("SPHEREKERN_SEED", "123")
        _, out, _ = run(capsys, "gegenbauer", "--alpha", "1.0", "--dmax", "2",
                        "--t", "0.0", "--no-timestamp")
        assert json.loads(out)["seed"] == 123

    def test_timestamp_present_by_default(self, capsys):
        _, out, _ = run(capsys, "gegenbauer", "--alpha", "1.0", "--dmax", "2",
                        "--t", "0.0")
        assert "timestamp" in json.loads(out)


class TestFormats:
    def test_csv_header_and_row(self, capsys):
        _, out, _ = run(capsys, "verify-t1t2", "--n", "4", "--r", "1",
                        "--samples", "20", "--format", "csv", "--no-timestamp")
        rows = list(csv.reader(io.StringIO(out)))
        assert len(rows) == 2
        header, row = rows
        assert header == sorted(header)
        doc = dict(zip(header, row))
        assert doc["passed"] == "True"
        assert float(doc["max_residual"]) < 1e-10

    def test_text_format(self, capsys):
        _, out, _ = run(capsys, "gegenbauer", "--alpha", "0.5", "--dmax", "2",
                        "--t", "0.5", "--format", "text", "--no-timestamp")
        assert "alpha: 0.5" in out

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "report.json"
        code, out, _ = run(capsys, "gegenbauer", "--alpha", "1.0", "--dmax", "2",
                           "--t", "0.25", "--output", str(target), "--no-timestamp")
        assert code == 0
        assert out == ""
        assert json.loads(target.read_text())["schema"] == 1


class TestCommands:
    def test_gegenbauer_matches_reference(self, capsys):
        _, out, _ = run(capsys, "gegenbauer", "--alpha", "1.5", "--dmax", "5",
                        "--t", "-0.3", "0.2", "0.9", "--no-timestamp")
        doc = json.loads(out)
        values = np.asarray(doc["values"])
        for d in range(6):
            for j, t in enumerate([-0.3, 0.2, 0.9]):
                assert values[d][j] == pytest.approx(scipy_gegenbauer(d, 1.5, t), abs=1e-12)

    def test_gegenbauer_from_n(self, capsys):
        _, out, _ = run(capsys, "gegenbauer", "--n", "4", "--dmax", "2",
                        "--t", "0.5", "--no-timestamp")
        assert json.loads(out)["alpha"] == 1.0

    def test_expand_dot(self, capsys):
        code, out, _ = run(capsys, "expand", "--kernel", "dot", "--n", "3",
                           "--dmax", "4", "--no-timestamp")
        assert code == 0
        c = json.loads(out)["expansion"]["coefficients"]
        assert c[1] == pytest.approx(1.0, abs=1e-10)
        assert max(abs(v) for i, v in enumerate(c) if i != 1) < 1e-10

    def test_expansion_file_roundtrip(self, capsys, tmp_path):
        path = tmp_path / "expansion.json"
        run(capsys, "expand", "--kernel", "gegenbauer:3", "--n", "5",
            "--dmax", "6", "--output", str(path), "--no-timestamp")
        code, out, _ = run(capsys, "check-pd", "--expansion", str(path), "--n", "5",
                           "--trials", "5", "--m", "15", "--no-timestamp")
        assert code == 0
        assert json.loads(out)["passed"] is True

    def test_check_invariance_pass_and_fail(self, capsys):
        code, _, _ = run(capsys, "check-invariance", "--kernel", "dot", "--n", "4",
                         "--trials", "50", "--no-timestamp")
        assert code == 0
        code, out, _ = run(capsys, "check-invariance", "--kernel", "coord", "--n", "4",
                           "--trials", "50", "--no-timestamp")
        assert code == 1
        assert json.loads(out)["passed"] is False

    def test_synth_bundle(self, capsys):
        code, out, _ = run(capsys, "synth-bundle", "--n", "5", "--r", "2",
                           "--dmax", "2", "--trials", "3", "--m", "12",
                           "--no-timestamp")
        assert code == 0
        doc = json.loads(out)
        assert doc["passed"] is True
        assert "feature_map_spec" in doc["expansion"]

    def test_musin(self, capsys):
        code, out, _ = run(capsys, "musin", "--kernel", "dot", "--n", "4", "--r", "1",
                           "--dmax", "4", "--samples", "50", "--no-timestamp")
        assert code == 0
        doc = json.loads(out)
        assert doc["max_residual"] < 1e-8

    def test_verify_addition(self, capsys):
        code, out, _ = run(capsys, "verify-addition", "--n", "6", "--r", "1",
                           "--k", "6", "--samples", "200", "--seed", "7",
                           "--no-timestamp")
        assert code == 0
        assert json.loads(out)["passed"] is True

    def test_verify_t1t2(self, capsys):
        code, out, _ = run(capsys, "verify-t1t2", "--n", "5", "--r", "2",
                           "--samples", "100", "--no-timestamp")
        assert code == 0
        assert json.loads(out)["max_residual"] < 1e-12

    def test_certify_roundtrip(self, capsys, tmp_path):
        path = tmp_path / "cert.json"
        run(capsys, "lp-bound", "--n", "4", "--theta", "60deg", "--dmax", "10",
            "--output", str(path), "--no-timestamp")
        code, out, _ = run(capsys, "certify", "--input", str(path), "--no-timestamp")
        assert code == 0
        doc = json.loads(out)
        assert doc["passed"] is True
        assert doc["max_violation"] <= 1e-9

    def test_certify_missing_file(self, capsys):
        code, _, err = run(capsys, "certify", "--input", "/nonexistent/cert.json")
        assert code == 2
        assert "error" in err
