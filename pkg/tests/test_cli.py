import json
import subprocess
import sys

import numpy as np
import pytest

from pentahelix.classify import Tolerances, classify_all, report_to_dict
from pentahelix.cli import dumps, main
from pentahelix.frenet import CurveSamples
from pentahelix.numkit import Grid


@pytest.fixture(scope="module")
def wfile(tmp_path_factory):
    path = tmp_path_factory.mktemp("curves") / "w1234.txt"
    assert main(["synth", "w", "1", "2", "3", "4", "--range", "0", "10", "--step", "1e-3",
                 "--out", str(path)]) == 0
    return path


@pytest.fixture(scope="module")
def v3file(tmp_path_factory):
    path = tmp_path_factory.mktemp("curves") / "v3.txt"
    assert main(["synth", "profile", "--k1", "1 + 0.3*sin(s)", "--k2", "2*k1",
                 "--k3", "1 + 0.3*cos(s)", "--k4", "2*k3", "--out", str(path)]) == 0
    return path


def write_circle(path):
    s = np.arange(10001) * 1e-3
    data = np.zeros((s.size, 6))
    data[:, 0], data[:, 1], data[:, 2] = s, np.cos(s), np.sin(s)
    np.savetxt(path, data, fmt="%.17g", header="dimension: 5\nparametrization: arclength")


class TestSynth:
    def test_row_count_and_header(self, wfile):
        lines = wfile.read_text().splitlines()
        header = [ln for ln in lines if ln.startswith("#")]
        rows = [ln for ln in lines if not ln.startswith("#")]
        assert len(rows) == 10001
        assert all(len(r.split()) == 6 for r in rows)
        assert "# dimension: 5" in header
        assert "# parametrization: arclength" in header
        resid = [h for h in header if h.startswith("# unit_speed_residual:")]
        assert resid and float(resid[0].split(":")[1]) <= 1e-9

    def test_degenerate_curvature_exit_3(self, tmp_path, capsys):
        assert main(["synth", "w", "1", "0", "3", "4", "--out", str(tmp_path / "x")]) == 3
        assert "DegenerateCurvature" in capsys.readouterr().err

    @pytest.mark.parametrize("argv", [
        ["synth", "w", "1", "2", "3"],
        ["synth", "w", "1", "x", "3", "4"],
        ["synth", "w", "1", "2", "3", "4", "--step", "-1"],
        ["synth", "w", "1", "2", "3", "4", "--range", "5", "1"],
        ["synth", "profile", "--k1", "1", "--k2", "1", "--k3", "1"],
        ["synth", "profile", "--k1", "1", "--k2", "__import__('os')", "--k3", "1", "--k4", "1"],
        ["synth", "profile", "--k1", "1 +", "--k2", "1", "--k3", "1", "--k4", "1"],
    ])
    def test_bad_params_exit_2(self, argv, tmp_path):
        assert main(argv + ["--out", str(tmp_path / "x")]) == 2

    def test_profile_is_v3(self, v3file, capsys):
        assert main(["analyze", str(v3file), "--expect", "v3"]) == 0

    def test_sampled_profile(self, tmp_path):
        s = np.linspace(0, 10, 1001)
        k = np.column_stack([s, 1 + 0.3 * np.sin(s), 2 + 0.6 * np.sin(s), np.ones_like(s), 2 * np.ones_like(s)])
        np.savetxt(tmp_path / "k.txt", k)
        out = tmp_path / "c.txt"
        assert main(["synth", "profile", "--samples", str(tmp_path / "k.txt"), "--out", str(out)]) == 0
        assert main(["analyze", str(out), "--expect", "v3"]) == 0


class TestAnalyze:
    def test_w_curve_expectation(self, wfile):
        assert main(["analyze", str(wfile), "--expect", "v1,v3,v5"]) == 0

    def test_mismatched_expectation_exit_1(self, wfile):
        assert main(["analyze", str(wfile), "--expect", "!v3"]) == 1

    def test_flags_do_not_change_exit_code(self, tmp_path):
        path = tmp_path / "wobbly.txt"
        assert main(["synth", "profile", "--k1", "1 + 0.5*sin(s)", "--k2", "1", "--k3", "1",
                     "--k4", "1", "--out", str(path)]) == 0
        assert main(["analyze", str(path)]) == 0
        assert main(["analyze", str(path), "--expect", "v1"]) == 1

    def test_planar_circle_exit_3_names_stage(self, tmp_path, capsys):
        path = tmp_path / "circle.txt"
        write_circle(path)
        assert main(["analyze", str(path)]) == 3
        err = capsys.readouterr().err
        assert "DegenerateCurvature" in err and "extract_frames" in err

    @pytest.mark.parametrize("body", [
        "# dimension: 4\n0 0 0 0 0 0\n",
        "# parametrization: polar\n0 0 0 0 0 0\n",
        "0 0 0 0 0\n1 1 1 1 1\n",
        "0 0 0 0 0 0\n0 1 1 1 1 1\n",
        "a b c d e f\n",
    ])
    def test_malformed_file_exit_2(self, body, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text(body)
        assert main(["analyze", str(path)]) == 2

    def test_missing_file_exit_2(self, tmp_path):
        assert main(["analyze", str(tmp_path / "nope.txt")]) == 2

    def test_raw_file_is_reparametrized(self, wfile, tmp_path):
        from scipy.interpolate import CubicSpline

        data = np.loadtxt(wfile)
        t = np.linspace(0, 1, 10001)
        s = 10 * (t + 0.1 * np.sin(2 * np.pi * t) / (2 * np.pi))
        pts = CubicSpline(data[:, 0], data[:, 1:])(s)
        raw = tmp_path / "raw.txt"
        np.savetxt(raw, np.column_stack([t, pts]), fmt="%.17g",
                   header="dimension: 5\nparametrization: raw")
        out = tmp_path / "raw.json"
        assert main(["analyze", str(raw), "--json", str(out), "--expect", "v1,v3,v5"]) == 0
        doc = json.loads(out.read_text())
        assert doc["provenance"]["reparametrized"] is True
        assert doc["provenance"]["jet_source"] == "fd"
        assert doc["tolerances"]["used"] > doc["tolerances"]["constancy"]

    def test_round_trip_matches_library(self, wfile, tmp_path):
        out = tmp_path / "r.json"
        assert main(["analyze", str(wfile), "--json", str(out)]) == 0
        doc = json.loads(out.read_text())
        data = np.loadtxt(wfile)
        direct = classify_all(CurveSamples(Grid.from_values(data[:, 0]), data[:, 1:]),
                              Tolerances(constancy=1e-6))
        expected = json.loads(dumps(report_to_dict(direct)))
        for key, value in expected.items():
            assert doc[key] == value, key

    def test_report_is_deterministic(self, wfile, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["analyze", str(wfile), "--json", str(a)])
        main(["analyze", str(wfile), "--json", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_report_provenance(self, wfile, tmp_path):
        out = tmp_path / "r.json"
        main(["analyze", str(wfile), "--json", str(out), "--tol", "2e-6"])
        doc = json.loads(out.read_text())
        import hashlib
        assert doc["input"]["sha256"] == hashlib.sha256(wfile.read_bytes()).hexdigest()
        assert doc["tolerances"]["constancy"] == 2e-6
        assert doc["provenance"]["step"] == pytest.approx(1e-3)
        assert doc["v1"]["constancy"]["tolerance"] > 0

    def test_env_tolerance(self, wfile, tmp_path, monkeypatch):
        monkeypatch.setenv("PENTAHELIX_TOL", "3e-6")
        out = tmp_path / "r.json"
        main(["analyze", str(wfile), "--json", str(out)])
        assert json.loads(out.read_text())["tolerances"]["constancy"] == 3e-6
        monkeypatch.setenv("PENTAHELIX_TOL", "abc")
        assert main(["analyze", str(wfile)]) == 2


class TestPlotdata:
    def test_ratio_column_is_flat(self, v3file, tmp_path):
        out = tmp_path / "p.txt"
        assert main(["plotdata", str(v3file), "--series", "ratio21", "--out", str(out)]) == 0
        assert out.read_text().splitlines()[1] == "# s ratio21"
        col = np.loadtxt(out)[:, 1]
        # points-only input, so the tolerance is the widened one
        tol = Tolerances().effective("fd")
        assert np.ptp(col) <= tol * max(1.0, abs(col.mean()))

    def test_F_on_w_curve(self, wfile, tmp_path):
        out = tmp_path / "p.txt"
        assert main(["plotdata", str(wfile), "--series", "k1,F,G,v3_axis", "--out", str(out)]) == 0
        data = np.loadtxt(out)
        assert data.shape[1] == 1 + 1 + 1 + 1 + 5
        assert np.max(np.abs(data[:, 2] - 0.390625)) <= 1e-3 * 0.390625
        assert np.max(np.abs(data[:, 3] - 80 / 9)) <= 1e-3 * 80 / 9

    def test_unknown_series_exit_2(self, wfile):
        assert main(["plotdata", str(wfile), "--series", "k1,bogus"]) == 2


def test_verify_unattainable_tolerance_exit_1(capsys):
    assert main(["verify", "--tol", "1e-15"]) == 1
    out = capsys.readouterr().out
    assert "[FAIL]" in out
    assert all(f"C{n} " in out for n in range(1, 11))


def test_unknown_suite_exit_2():
    assert main(["verify", "--suite", "nightly"]) == 2


def test_console_entry_point_runs():
    res = subprocess.run([sys.executable, "-m", "pentahelix.cli", "plotdata", "x", "--series", "bogus"],
                         capture_output=True, text=True)
    assert res.returncode == 2


def test_dumps_keeps_17_digits():
    x = 0.1 + 0.2
    assert json.loads(dumps({"x": x}))["x"] == x
    assert dumps({"n": float("nan")}) == '{\n  "n": null\n}'
