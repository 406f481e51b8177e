"""CLI surface: dumps, study commands, config handling, exit codes."""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from mhotv.cli import main


def run_cli(args):
    return main(list(args))


class TestDumps:
    def test_stencil_dump_golden(self, tmp_path):
        out = tmp_path / "stencil.csv"
        assert run_cli(["stencil", "dump", "--order", "2", "--scale", "2",
                        "--length", "9", "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "index,value"
        values = [float(line.split(",")[1]) for line in lines[1:]]
        assert values == [1.0, 0.0, 0.0, 0.0, 1.0, 1.0, -2.0, -2.0, 1.0]

    def test_filter_dump_matches_formula(self, tmp_path):
        out = tmp_path / "filter.csv"
        assert run_cli(["filter", "dump", "--order", "1", "--scale", "1",
                        "--length", "8", "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "xi,re,im"
        xi = np.arange(8)
        expected = np.exp(2j * np.pi * xi / 8) - 1
        expected[0] = 0.0
        for line, want in zip(lines[1:], expected):
            _, re, im = line.split(",")
            assert abs(float(re) - want.real) < 1e-12
            assert abs(float(im) - want.imag) < 1e-12

    def test_wavelet_filter_dump(self, capsys):
        assert run_cli(["filter", "dump", "--order", "2", "--wavelet"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "index,lowpass,highpass"
        assert len(lines) == 5


class TestExitCodes:
    def test_missing_config_file(self, tmp_path):
        assert run_cli(["recover1d", "--config", str(tmp_path / "nope.toml"),
                        "--out", str(tmp_path)]) == 2

    def test_bad_toml(self, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text("not = [valid")
        assert run_cli(["recover1d", "--config", str(bad), "--out", str(tmp_path)]) == 2

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("[recover1d]\nbogus_key = 3\n")
        assert run_cli(["recover1d", "--config", str(cfg), "--out", str(tmp_path)]) == 2

    def test_invalid_value(self, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("[recover1d]\nsampling = 2.5\n")
        assert run_cli(["recover1d", "--config", str(cfg), "--out", str(tmp_path)]) == 2

    def test_numerical_failure_exit(self):
        # an impossible adjoint tolerance reports as numerical failure
        assert run_cli(["adjoint-check", "--which", "sensing", "--n", "32", "--tol", "0"]) == 3

    def test_adjoint_check_ok(self):
        assert run_cli(["adjoint-check", "--which", "radon", "--n", "32"]) == 0


class TestStudyCommands:
    def test_recover1d_with_config(self, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text(
            "[recover1d]\n"
            "n = 96\ntrials = 1\norders = [2]\nlevels = 2\nlam_points = 4\n"
            "lam_refine = 0\nmax_outer = 30\ninclude_wavelets = false\n"
        )
        out = tmp_path / "run"
        assert run_cli(["recover1d", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "recovery_errors.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["n"] == 96
        assert "wall_time_seconds" in manifest

    def test_trials_override(self, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("[success]\nn = 96\nrates = [1.0]\norders = [2]\nlevels = 2\n"
                       "include_wavelets = false\nmax_outer = 400\nal_outer = 10\ntrials = 5\n")
        out = tmp_path / "run"
        assert run_cli(["success", "--config", str(cfg), "--out", str(out),
                        "--trials", "1"]) == 0
        rows = (out / "success_curves.csv").read_text().strip().splitlines()[1:]
        assert all(row.endswith(",1") for row in rows)

    def test_sweep_command(self, tmp_path):
        out = tmp_path / "sweep"
        assert run_cli(["sweep", "--n", "96", "--order", "2", "--levels", "2",
                        "--lam-points", "4", "--max-outer", "25", "--seed", "1",
                        "--backend", "decomp", "--out", str(out)]) == 0
        lines = (out / "sweep.csv").read_text().strip().splitlines()
        assert lines[0] == "lambda,rel_error"
        assert len(lines) == 5

    def test_console_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "mhotv.cli", "stencil", "dump",
                               "--order", "1", "--length", "5"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.splitlines()[0] == "index,value"
