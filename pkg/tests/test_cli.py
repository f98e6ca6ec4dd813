"""Tests for the command-line interface: parsing, formats, exit codes."""

import argparse
import json
import math
import subprocess
import sys

import pytest

from spherecalib.cli import main, parse_grid, parse_radius


def run_cli(args, **kw):
    return subprocess.run(
        [sys.executable, "-m", "spherecalib.cli", *args],
        capture_output=True, text=True, **kw,
    )


class TestParsing:
    def test_plain_float(self):
        assert parse_radius("0.75") == 0.75

    def test_pi(self):
        assert parse_radius("pi") == math.pi

    def test_pi_fraction(self):
        assert parse_radius("pi/3") == pytest.approx(math.pi / 3, rel=1e-15)

    def test_pi_multiple_fraction(self):
        assert parse_radius("2pi/5") == pytest.approx(2 * math.pi / 5, rel=1e-15)

    def test_rejects_garbage(self):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_radius("two")

    def test_grid(self):
        assert parse_grid("0.1:0.4:0.1") == pytest.approx([0.1, 0.2, 0.3, 0.4])

    def test_grid_rejects_bad_step(self):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_grid("0.4:0.1:0.1")


class TestHProfile:
    def test_json_output(self, tmp_path):
        out = tmp_path / "h.json"
        code = main(["h-profile", "--k", "6", "--R", "0.8",
                     "--format", "json", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["k"] == 6
        assert doc["min_h"] > 0.0
        assert doc["constraint_residual"] < 1e-7
        assert doc["config"]["ode_tol"] == 1e-10

    def test_csv_format(self, tmp_path):
        out = tmp_path / "h.csv"
        code = main(["h-profile", "--k", "4", "--R", "pi/3",
                     "--format", "csv", "--samples", "50", "--out", str(out)])
        assert code == 0
        raw = out.read_bytes()
        lines = raw.split(b"\r\n")
        assert lines[0] == b"s,h,f_1"
        assert len(lines) == 52  # header + 50 rows + trailing newline
        # 17 significant digits survive a round trip
        first = lines[1].split(b",")
        assert float(first[0]) == pytest.approx(math.pi / 3, rel=1e-15)

    def test_odd_k_exit_2(self):
        assert main(["h-profile", "--k", "5", "--R", "0.5"]) == 2

    def test_json_deterministic(self, tmp_path):
        # identical invocations (including --out, which is echoed in the
        # config block) must produce byte-identical documents
        out = tmp_path / "h.json"
        main(["h-profile", "--k", "6", "--R", "0.8", "--out", str(out)])
        first = out.read_bytes()
        main(["h-profile", "--k", "6", "--R", "0.8", "--out", str(out)])
        assert out.read_bytes() == first


class TestScan:
    def test_k8_flags_with_expectation(self, tmp_path):
        out = tmp_path / "scan.csv"
        code = main(["scan", "--k", "8", "--R-grid", "0.3:0.6:0.3",
                     "--expect-nonnegative", "--format", "csv", "--out", str(out)])
        assert code == 1
        lines = out.read_bytes().split(b"\r\n")
        assert lines[0] == b"R,min_h,argmin,flag"
        assert lines[1].endswith(b",true")

    def test_k8_without_expectation(self, tmp_path):
        out = tmp_path / "scan.csv"
        code = main(["scan", "--k", "8", "--R-grid", "0.3:0.6:0.3",
                     "--format", "csv", "--out", str(out)])
        assert code == 0

    def test_k4_clean(self, tmp_path):
        out = tmp_path / "scan.json"
        code = main(["scan", "--k", "4", "--R-grid", "0.3:0.9:0.3",
                     "--expect-nonnegative", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["flagged_windows"] == []

    def test_odd_k_exit_2(self):
        assert main(["scan", "--k", "7", "--R-grid", "0.3:0.6:0.3"]) == 2


class TestEuclid:
    def test_requires_two_radii(self):
        assert main(["euclid", "--k", "4", "--R", "0.3"]) == 2

    def test_unsupported_k(self):
        assert main(["euclid", "--k", "8", "--R", "0.3", "0.1"]) == 2

    def test_decreasing_errors(self, tmp_path):
        out = tmp_path / "eu.json"
        code = main(["euclid", "--k", "2", "--R", "0.3", "0.1",
                     "--samples", "6", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["max_errors"][1] < doc["max_errors"][0]


class TestVerify:
    def test_k4_passes(self, tmp_path):
        out = tmp_path / "v.json"
        code = main(["verify", "--k", "4", "--R", "0.9",
                     "--samples", "60", "--boundary-samples", "16",
                     "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        checks = {name: data["pass"] for name, data in doc["checks"].items()}
        assert all(checks.values())
        assert doc["pass"] is True
        assert set(checks) == {"tangency", "singularity", "divergence_bound",
                               "area_balance"}

    def test_k8_small_radius_fails(self, tmp_path):
        out = tmp_path / "v.json"
        code = main(["verify", "--k", "8", "--R", "0.5",
                     "--samples", "20", "--boundary-samples", "8",
                     "--out", str(out)])
        assert code == 1
        doc = json.loads(out.read_text())
        assert doc["pass"] is False
        assert doc["checks"]["divergence_bound"]["pass"] is False
        assert doc["checks"]["tangency"]["pass"] is True

    def test_invalid_tolerance_exit_2(self):
        assert main(["verify", "--k", "4", "--R", "0.9", "--ode-tol", "-1"]) == 2


class TestEntryPoint:
    def test_module_invocation_stdout(self):
        res = run_cli(["scan", "--k", "4", "--R-grid", "0.5:0.5:0.1",
                       "--format", "csv"])
        assert res.returncode == 0
        assert res.stdout.startswith("R,min_h,argmin,flag")

    def test_threads_env_same_output(self, tmp_path):
        base = ["verify", "--k", "4", "--R", "0.8", "--samples", "30",
                "--boundary-samples", "8"]
        r1 = run_cli(base, env={"PATH": "/usr/bin:/bin", "CALIB_THREADS": "1"})
        r4 = run_cli(base, env={"PATH": "/usr/bin:/bin", "CALIB_THREADS": "4"})
        assert r1.returncode == r4.returncode == 0
        assert r1.stdout == r4.stdout
