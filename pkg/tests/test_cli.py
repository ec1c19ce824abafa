import json
import subprocess
import sys

import numpy as np
import pytest

from chargelab.cli import main
from chargelab.report import InequalityReport, format_float, write_csv


def run(args):
    return main([str(a) for a in args])


class TestReports:
    def rep(self, lhs=1.0, rhs=1.0005, middle=None, tol=1e-3):
        return InequalityReport(
            case="c", d=1, m=0, h=1.0, grid="32", lhs=lhs,
            rhs_terms={"t": rhs}, middle=middle, tol=tol,
        )

    def test_slack_and_equality(self):
        r = self.rep()
        assert r.slack == pytest.approx(5e-4)
        assert r.holds and r.equality
        assert not self.rep(rhs=0.9).holds
        assert self.rep(rhs=1.5).holds and not self.rep(rhs=1.5).equality

    def test_chain_ordering(self):
        assert self.rep(middle=1.0002).chain_ordered()
        assert not self.rep(middle=1.01).chain_ordered()
        assert self.rep(middle=None).chain_ordered()

    def test_validate_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            self.rep(lhs=float("nan")).validate()

    def test_csv_bytes_deterministic(self, tmp_path):
        reps = [self.rep(), self.rep(rhs=2.0, middle=1.5)]
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(p1, reps)
        write_csv(p2, reps)
        assert p1.read_bytes() == p2.read_bytes()

    def test_format_float_roundtrip(self):
        for x in (1 / 3, 0.1, 2 ** 0.5, 1e-17, 123456.789):
            assert float(format_float(x)) == x


class TestVerifyCommand:
    def test_extremal_case_passes(self, tmp_path):
        code = run(["verify", "--case", "extremal-charge", "--d", 2,
                    "--h", 1.0, "--grid", 96, "--out", tmp_path])
        assert code == 0
        rows = (tmp_path / "report.csv").read_text().strip().splitlines()
        assert rows[0].startswith("case,d,m,h")
        assert len(rows) == 3  # additive + multiplicative
        data = json.loads((tmp_path / "report.json").read_text())
        assert all(r["equality"] for r in data)

    def test_corrupted_case_fails_with_exit_1(self, tmp_path, capsys):
        code = run(["verify", "--case", "corrupted-extremal", "--d", 2,
                    "--h", 1.0, "--grid", 64, "--out", tmp_path])
        assert code == 1
        err = capsys.readouterr().err
        assert "FAIL" in err
        # the report is still written, with the negative slack on record
        data = json.loads((tmp_path / "report.json").read_text())
        assert data[0]["slack"] < -1e-3

    def test_unknown_case_exit_2(self, tmp_path, capsys):
        assert run(["verify", "--case", "nope", "--out", tmp_path]) == 2
        assert "config error" in capsys.readouterr().err

    def test_config_file_with_unknown_key_exit_2(self, tmp_path, capsys):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("case: zero\nbogus_key: 1\n")
        assert run(["verify", "--config", cfg, "--out", tmp_path]) == 2

    def test_config_file_drives_case(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("case: mixed-m1\nd: 2\nh: 1.0\ngrid: 48\n")
        assert run(["verify", "--config", cfg, "--out", tmp_path]) == 0

    def test_cli_overrides_config(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("case: nope\n")
        code = run(["verify", "--config", cfg, "--case", "zero",
                    "--out", tmp_path])
        assert code == 0

    def test_report_csv_deterministic_across_runs(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run(["verify", "--case", "gaussian-charge", "--d", 2,
                        "--h", 0.5, "--grid", 64, "--out", out]) == 0
        assert (a / "report.csv").read_bytes() == (b / "report.csv").read_bytes()


class TestOtherCommands:
    def test_stechkin_curve_outputs(self, tmp_path):
        assert run(["stechkin-curve", "--d", 1, "--out", tmp_path]) == 0
        for name in ("stechkin_curve.csv", "omega_curve.csv",
                     "attained_points.csv", "stechkin_curve.svg"):
            assert (tmp_path / name).exists()
        svg = (tmp_path / "stechkin_curve.svg").read_text()
        assert svg.startswith("<svg") and "polyline" in svg

    def test_stechkin_curve_mixed_setting(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("setting: mixed\nd: 2\nm: 1\nh_attained: [0.5, 1.0]\n")
        assert run(["stechkin-curve", "--config", cfg, "--out", tmp_path]) == 0

    def test_recover_demo(self, tmp_path):
        code = run(["recover", "--d", 1, "--deltas", "0.1,1.0",
                    "--grid", 256, "--out", tmp_path])
        assert code == 0
        rows = (tmp_path / "recovery.csv").read_text().strip().splitlines()
        assert len(rows) == 3
        summary = json.loads((tmp_path / "recovery_summary.json").read_text())
        for entry in summary:
            assert entry["err_worst"] == pytest.approx(entry["omega"],
                                                       abs=1e-3)
            assert entry["err_typical"] <= entry["omega"] + 1e-3
        assert (tmp_path / "estimate_dump.csv").exists()
        assert (tmp_path / "recovery.svg").exists()

    def test_sharpness_search_m1_control(self, tmp_path):
        code = run(["sharpness-search", "--d", 2, "--m", 1, "--h", 1.0,
                    "--budget", 6, "--seed", 0, "--out", tmp_path])
        assert code == 0
        summary = json.loads(
            (tmp_path / "sharpness_summary.json").read_text()
        )
        assert summary["exploratory"] is True
        assert summary["best_ratio"] <= 1 + 1e-6

    def test_console_entry_point(self, tmp_path):
        out = subprocess.run(
            [sys.executable, "-m", "chargelab.cli", "verify", "--case",
             "zero", "--out", str(tmp_path)],
            capture_output=True, text=True,
        )
        assert out.returncode == 0
