"""
Command-line surface tests: argument validation, exit codes and written artifacts
"""

import csv
import json
import logging

import pytest

from arkc import cli
from arkc.constants import ExitCodes
from arkc.damping import ARKC_DAMPING


def _read_csv(path):
    with open(path, newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.DictReader(lines))


@pytest.mark.cli
class TestCommandLine:

    @pytest.fixture(autouse=True)
    def setup_logger(self, monkeypatch):
        self.logger = logging.getLogger(self.__class__.__name__)
        # keep the session's log handlers in place
        monkeypatch.setattr(cli, "setup_logging", lambda level=None, log_file=None: logging.getLogger("arkc"))

    @pytest.mark.smoke
    def test_help_exits_cleanly(self, capsys):
        assert cli.main(["-h"]) == ExitCodes.SUCCESS
        assert "verify-tables" in capsys.readouterr().out

    @pytest.mark.negative
    @pytest.mark.parametrize("argv", [
        [],
        ["frobnicate"],
        ["integrate", "--tol", "2"],
        ["integrate", "--tol", "0"],
        ["table2", "--a", "-1"],
        ["integrate", "--scheme", "euler"],
        ["convergence", "--levels", "0"],
        ["stability", "--grid", "50", "50"],
        ["stability", "--grid", "1", "400"],
        ["integrate", "--n", "2", "--fixed-steps", "5"],
    ])
    def test_invalid_arguments_exit_with_code_one(self, argv):
        self.logger.info("Invalid invocation", extra={"argv": argv})

        assert cli.main(argv) == ExitCodes.INVALID_ARGUMENTS

    def test_stability_scan_to_json(self, tmp_path):
        out = tmp_path / "region.json"

        code = cli.main(["stability", "--s", "8", "--grid", "100", "100", "--format", "json", "--out", str(out)])

        record = json.loads(out.read_text(encoding="utf-8"))
        assert code == ExitCodes.SUCCESS
        assert record["command"] == "stability"
        assert len(record["rows"]) == 100 * 100
        assert record["metrics"]["scheme"] == "arkc"
        assert record["metrics"]["d_s"] > 0.0

    def test_stability_curve_profile_to_csv(self, tmp_path):
        out = tmp_path / "curve.csv"

        code = cli.main(["stability", "--scheme", "arkc", "--s", "10", "--curve", "0.5", "--out", str(out)])

        rows = _read_csv(out)
        assert code == ExitCodes.SUCCESS
        assert set(rows[0]) == {"p", "q", "modulus"}
        assert all(float(row["p"]) <= 0.0 for row in rows)

    def test_fixed_step_integration_with_samples(self, tmp_path):
        out = tmp_path / "profile.csv"

        code = cli.main(["integrate", "--problem", "linear-ad", "--n", "32", "--fixed-steps", "50",
                         "--sample-times", "0", "0.25", "0.5", "--out", str(out)])

        assert code == ExitCodes.SUCCESS
        assert len(_read_csv(out)) == 32
        trajectory = _read_csv(f"{out}.trajectory.csv")
        assert sorted({float(row["t"]) for row in trajectory}) == pytest.approx([0.0, 0.25, 0.5])

    def test_adaptive_integration_reports_counters(self, tmp_path):
        out = tmp_path / "run.json"

        code = cli.main(["integrate", "--problem", "linear-ad", "--n", "40", "--tol", "1e-2",
                         "--format", "json", "--out", str(out)])

        metrics = json.loads(out.read_text(encoding="utf-8"))["metrics"]
        self.logger.info("Adaptive run", extra=metrics)
        assert code == ExitCodes.SUCCESS
        assert metrics["steps"] > 0
        assert metrics["fa_evals"] == 1 + 3 * (metrics["steps"] + metrics["rejected"])
        assert metrics["controller"]["total_attempts"] == metrics["steps"] + metrics["rejected"]
        assert metrics["final_time"] == pytest.approx(0.5)
        assert metrics["linf_error"] < 1e-2

    def test_divergent_fixed_run_exits_with_code_two(self):
        # two stages cannot cover h*rho = 225
        code = cli.main(["integrate", "--problem", "linear-ad", "--n", "150", "--fixed-steps", "200",
                         "--stages", "2", "--eta", "0.15"])

        assert code == ExitCodes.NUMERICAL_FAILURE

    def test_table2_single_row(self, tmp_path):
        out = tmp_path / "table2.csv"

        code = cli.main(["table2", "--a", "0.1", "--tol", "1e-2", "--out", str(out)])

        rows = _read_csv(out)
        assert code == ExitCodes.SUCCESS
        assert len(rows) == 1
        assert rows[0]["status"] == "ok"
        assert out.read_text(encoding="utf-8").startswith("# ")

    def test_convergence_levels(self, tmp_path):
        out = tmp_path / "convergence.json"

        code = cli.main(["convergence", "--problem", "linear-ad", "--n", "32", "--scheme", "ad1",
                         "--levels", "3", "--base-steps", "40", "--format", "json", "--out", str(out)])

        record = json.loads(out.read_text(encoding="utf-8"))
        assert code == ExitCodes.SUCCESS
        assert [row["n_steps"] for row in record["rows"]] == [40, 80, 160]
        assert len({row["stages"] for row in record["rows"]}) == 1
        assert record["metrics"]["scheme"] == "ad1"

    def test_peclet_trace_starts_at_twenty(self, tmp_path):
        out = tmp_path / "peclet.csv"

        code = cli.main(["peclet-trace", "--n", "20", "--out", str(out)])

        rows = _read_csv(out)
        assert code == ExitCodes.SUCCESS
        assert len(rows) == cli.DEFAULT_PECLET_SAMPLES
        assert float(rows[0]["peclet"]) == pytest.approx(20.0)

    def test_tampered_table_fails_verification(self):
        result = cli.cmd_verify_tables(ARKC_DAMPING.with_entry(1.0, 20, 0.15))

        assert result.exit_code == ExitCodes.VERIFICATION_FAILURE
        assert result.metrics["failed"] >= 1

    @pytest.mark.slow
    def test_verify_tables_passes(self, tmp_path):
        out = tmp_path / "verify.csv"

        assert cli.main(["verify-tables", "--out", str(out)]) == ExitCodes.SUCCESS
        assert all(row["passed"] == "true" for row in _read_csv(out))

    def test_stdout_when_no_output_file(self, capsys):
        code = cli.main(["stability", "--s", "4", "--curve", "0.2"])

        assert code == ExitCodes.SUCCESS
        assert capsys.readouterr().out.startswith("p,q,modulus")
