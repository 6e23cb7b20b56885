"""CLI and CSV ingestion tests."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from spearperm import (
    InsufficientDataError,
    InvalidInputError,
    ParseError,
    exact_permutation_pvalue,
    PairedSample,
)
from spearperm.cli import ColumnSelector, MissingPolicy, main, read_paired_csv

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
PSA_CSV = os.path.join(DATA_DIR, "psa_synthetic.csv")


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestReadPairedCsv:
    def test_simple(self, tmp_path):
        path = write_csv(tmp_path, "a,b\n1,2\n3,4\n5,6\n")
        sample = read_paired_csv(path, ColumnSelector("a", "b"))
        assert sample.n == 3
        np.testing.assert_array_equal(sample.xs, [1, 3, 5])

    def test_bundled_file_drops_incomplete_rows(self):
        sample = read_paired_csv(PSA_CSV, ColumnSelector("age", "psa"))
        assert sample.n == 473

    def test_error_policy(self, tmp_path):
        path = write_csv(tmp_path, "a,b\n1,2\n3,\n5,6\n")
        with pytest.raises(ParseError) as exc:
            read_paired_csv(path, ColumnSelector("a", "b"), MissingPolicy.ERROR)
        assert exc.value.row == 3

    def test_unparseable_cell_reports_row(self, tmp_path):
        path = write_csv(tmp_path, "a,b\n1,2\n3,apple\n5,6\n")
        with pytest.raises(ParseError) as exc:
            read_paired_csv(path, ColumnSelector("a", "b"))
        assert exc.value.row == 3

    def test_index_selection_headerless(self, tmp_path):
        path = write_csv(tmp_path, "1,2,9\n3,4,9\n5,6,9\n")
        sample = read_paired_csv(path, ColumnSelector("0", "1"))
        assert sample.n == 3
        np.testing.assert_array_equal(sample.ys, [2, 4, 6])

    def test_index_selection_with_header(self, tmp_path):
        path = write_csv(tmp_path, "left,right\n1,2\n3,4\n")
        sample = read_paired_csv(path, ColumnSelector("0", "1"))
        assert sample.n == 2

    def test_missing_column(self, tmp_path):
        path = write_csv(tmp_path, "a,b\n1,2\n3,4\n")
        with pytest.raises(InvalidInputError):
            read_paired_csv(path, ColumnSelector("a", "zz"))

    def test_same_column_rejected(self):
        with pytest.raises(InvalidInputError):
            ColumnSelector("a", "a")

    def test_short_row(self, tmp_path):
        path = write_csv(tmp_path, "a,b\n1,2\n3\n")
        with pytest.raises(ParseError) as exc:
            read_paired_csv(path, ColumnSelector("a", "b"))
        assert exc.value.row == 3

    def test_insufficient_rows(self, tmp_path):
        path = write_csv(tmp_path, "a,b\n1,2\n")
        with pytest.raises(InsufficientDataError):
            read_paired_csv(path, ColumnSelector("a", "b"))

    def test_na_tokens_are_missing(self, tmp_path):
        path = write_csv(tmp_path, "a,b\n1,2\n3,NA\n5,nan\n7,8\n")
        sample = read_paired_csv(path, ColumnSelector("a", "b"))
        assert sample.n == 2

    def test_blank_lines_skipped(self, tmp_path):
        path = write_csv(tmp_path, "a,b\n1,2\n\n3,4\n")
        assert read_paired_csv(path, ColumnSelector("a", "b")).n == 2

    def test_missing_file(self):
        with pytest.raises(ParseError):
            read_paired_csv("/nonexistent/nope.csv", ColumnSelector("a", "b"))


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestTestCommand:
    def test_json_output_and_determinism(self, tmp_path, capsys):
        path = write_csv(tmp_path, "x,y\n1,5\n2,1\n3,8\n4,3\n5,9\n6,4\n")
        args = ["test", path, "--x", "x", "--y", "y", "--method", "stu-permute",
                "--b", "200", "--seed", "42"]
        code, out1, _ = run_cli(args, capsys)
        assert code == 0
        payload = json.loads(out1)
        assert payload["method"] == "stu-permute"
        assert payload["n"] == 6
        assert payload["permutations"] == 200
        assert payload["seed"] == 42
        assert 0.0 <= payload["p_value"] <= 1.0
        code, out2, _ = run_cli(args, capsys)
        assert out1 == out2

    def test_negate_y_flips_estimate_and_swaps_tails(self, tmp_path, capsys):
        rows = "x,y\n" + "\n".join(
            f"{x},{y}" for x, y in zip([1, 2, 3, 4, 5, 6], [2, 1, 4, 6, 3, 5])
        )
        path = write_csv(tmp_path, rows + "\n")
        base = ["test", path, "--x", "x", "--y", "y", "--method", "t"]
        _, out_plain, _ = run_cli(base, capsys)
        _, out_neg, _ = run_cli(base + ["--negate-y"], capsys)
        plain = json.loads(out_plain)
        negated = json.loads(out_neg)
        assert negated["estimate"] == -plain["estimate"]
        # on the enumerated null the strict tails swap exactly under negation
        sample = PairedSample([1, 2, 3, 4, 5, 6], [2, 1, 4, 6, 3, 5])
        flipped = PairedSample([1, 2, 3, 4, 5, 6], [-2, -1, -4, -6, -3, -5])
        assert exact_permutation_pvalue(sample, "plain", "greater") == (
            exact_permutation_pvalue(flipped, "plain", "less")
        )
        assert exact_permutation_pvalue(sample, "stu", "greater") == (
            exact_permutation_pvalue(flipped, "stu", "less")
        )

    def test_log_transform_requires_positive(self, tmp_path, capsys):
        path = write_csv(tmp_path, "x,y\n1,-5\n2,1\n3,8\n")
        code, _, err = run_cli(
            ["test", path, "--x", "x", "--y", "y", "--log-y"], capsys
        )
        assert code == 3
        assert "positive" in err

    def test_bundled_workflow(self, capsys):
        code, out, _ = run_cli(
            ["test", PSA_CSV, "--x", "age", "--y", "psa", "--log-y", "--negate-y",
             "--method", "stu-permute", "--b", "500", "--seed", "42"],
            capsys,
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["n"] == 473
        assert payload["estimate"] > 0
        assert payload["p_value"] < 0.05

    def test_out_file(self, tmp_path, capsys):
        path = write_csv(tmp_path, "x,y\n1,5\n2,1\n3,8\n4,3\n")
        out_path = tmp_path / "result.json"
        code, stdout, _ = run_cli(
            ["test", path, "--x", "x", "--y", "y", "--method", "t",
             "--out", str(out_path)],
            capsys,
        )
        assert code == 0
        assert stdout == ""
        assert json.loads(out_path.read_text())["method"] == "t"

    def test_missing_file_is_data_error(self, capsys):
        code, _, err = run_cli(
            ["test", "/nope/missing.csv", "--x", "a", "--y", "b"], capsys
        )
        assert code == 3

    def test_bad_column_is_invalid_input(self, tmp_path, capsys):
        path = write_csv(tmp_path, "x,y\n1,5\n2,1\n")
        code, _, _ = run_cli(["test", path, "--x", "x", "--y", "zz"], capsys)
        assert code == 2

    def test_bad_flag_exits_2(self, tmp_path):
        path = write_csv(tmp_path, "x,y\n1,5\n2,1\n")
        with pytest.raises(SystemExit) as exc:
            main(["test", path, "--x", "x", "--y", "y", "--method", "bogus"])
        assert exc.value.code == 2

    def test_constant_margin_is_data_error(self, tmp_path, capsys):
        path = write_csv(tmp_path, "x,y\n1,5\n1,1\n1,8\n")
        code, _, err = run_cli(
            ["test", path, "--x", "x", "--y", "y", "--method", "t"], capsys
        )
        assert code == 3


class TestSimulateCommand:
    BASE = ["simulate", "--scenario", "mvn", "--n", "10", "--method", "stu-permute",
            "--reps", "30", "--b", "40", "--seed", "7", "--workers", "1"]

    def test_csv_determinism(self, tmp_path, capsys):
        code, out1, _ = run_cli(self.BASE, capsys)
        assert code == 0
        code, out2, _ = run_cli(self.BASE, capsys)
        assert out1 == out2
        header = out1.splitlines()[0]
        assert header == "scenario,n,method,alpha,reps,B,rejection_rate,mc_se,seed"
        assert len(out1.splitlines()) == 2

    def test_json_format(self, capsys):
        code, out, _ = run_cli(self.BASE + ["--format", "json"], capsys)
        assert code == 0
        records = json.loads(out)
        assert records[0]["scenario"] == "mvn"
        assert records[0]["B"] == 40

    def test_preset_defaults_fill_axes(self, capsys):
        # desk preset with explicit tiny overrides across the default grid
        # would be slow; restrict axes and check the preset's B is used
        code, out, _ = run_cli(
            ["simulate", "--preset", "desk", "--scenario", "circular", "--n", "10",
             "--method", "t", "--reps", "25", "--seed", "1", "--workers", "1"],
            capsys,
        )
        assert code == 0
        row = out.splitlines()[1].split(",")
        assert row[5] == "500"  # desk permutation count

    def test_multiple_axes(self, capsys):
        code, out, _ = run_cli(
            ["simulate", "--scenario", "mvn", "--scenario", "circular",
             "--n", "10", "--n", "12", "--method", "t", "--method", "fisher-z",
             "--reps", "10", "--b", "10", "--seed", "3", "--workers", "1"],
            capsys,
        )
        assert code == 0
        assert len(out.splitlines()) == 1 + 2 * 2 * 2

    def test_bad_scenario_is_invalid_input(self, capsys):
        code, _, _ = run_cli(
            ["simulate", "--scenario", "zeta", "--n", "10", "--method", "t",
             "--reps", "5", "--seed", "1"],
            capsys,
        )
        assert code == 2


class TestReportCommand:
    def make_grid(self, tmp_path, capsys):
        out_path = tmp_path / "grid.csv"
        code, _, _ = run_cli(
            ["simulate", "--scenario", "mvn", "--n", "10", "--n", "14",
             "--method", "t", "--method", "permute", "--reps", "20", "--b", "20",
             "--seed", "5", "--workers", "1", "--out", str(out_path)],
            capsys,
        )
        assert code == 0
        return str(out_path)

    def test_json_series(self, tmp_path, capsys):
        grid = self.make_grid(tmp_path, capsys)
        code, out, _ = run_cli(["report", grid], capsys)
        assert code == 0
        series = json.loads(out)
        assert len(series) == 2
        for entry in series:
            assert entry["n"] == [10, 14]
            assert len(entry["rejection_rate"]) == 2

    def test_csv_series(self, tmp_path, capsys):
        grid = self.make_grid(tmp_path, capsys)
        code, out, _ = run_cli(["report", grid, "--format", "csv"], capsys)
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "scenario,method,n,rejection_rate"
        assert len(lines) == 1 + 4

    def test_malformed_input(self, tmp_path, capsys):
        path = write_csv(tmp_path, "nope,columns\n1,2\n")
        code, _, _ = run_cli(["report", path], capsys)
        assert code == 3


class TestEntryPoint:
    def test_module_invocation(self):
        env = dict(os.environ)
        src = os.path.join(os.path.dirname(os.path.dirname(__file__)), "src")
        env["PYTHONPATH"] = src + os.pathsep + env.get("PYTHONPATH", "")
        proc = subprocess.run(
            [sys.executable, "-m", "spearperm.cli", "--help"],
            capture_output=True, text=True, env=env,
        )
        assert proc.returncode == 0
        assert "simulate" in proc.stdout
