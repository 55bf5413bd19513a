"""CLI commands: exit codes, artifacts, determinism."""

import json

import pytest
from click.testing import CliRunner

from pcrsim.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


class TestVerifyHybrid:
    def test_small_range_passes(self, runner, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(
            main,
            ["verify-hybrid", "--n", "1..3", "--s", "2", "--seed", "7",
             "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert doc["tool"] == "pcrsim"
        assert doc["seed"] == 7
        assert all(rep["passed"] for rep in doc["reports"])

    def test_invalid_precision_is_usage_error(self, runner):
        result = runner.invoke(
            main, ["verify-hybrid", "--n", "1", "--s", "1", "--seed", "7"]
        )
        assert result.exit_code != 0
        assert ">= 2" in result.output

    def test_csv_artifact(self, runner, tmp_path):
        out = tmp_path / "report.csv"
        result = runner.invoke(
            main,
            ["verify-hybrid", "--n", "1", "--s", "2", "--seed", "7",
             "--format", "csv", "--out", str(out)],
        )
        assert result.exit_code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("report,n,s,seed")
        assert len(lines) >= 2

    def test_byte_identical_reports(self, runner, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            result = runner.invoke(
                main,
                ["verify-hybrid", "--n", "2", "--s", "2", "--seed", "9",
                 "--out", str(path)],
            )
            assert result.exit_code == 0
        assert a.read_bytes() == b.read_bytes()


class TestRoundTable:
    @pytest.mark.parametrize("s", [2, 5, 8])
    def test_identities_pass(self, runner, s):
        result = runner.invoke(main, ["round-table", "--s", str(s)])
        assert result.exit_code == 0, result.output
        assert "FAIL" not in result.output

    def test_rejects_s1(self, runner):
        result = runner.invoke(main, ["round-table", "--s", "1"])
        assert result.exit_code != 0


class TestCodeSearch:
    def test_writes_table_with_verified_distance(self, runner, tmp_path):
        out = tmp_path / "code.txt"
        result = runner.invoke(
            main,
            ["code-search", "--s", "2", "--n", "16", "--seed", "1",
             "--out", str(out)],
        )
        assert result.exit_code == 0
        from pcrsim.codes import CodeTable

        table = CodeTable.from_text(out.read_text())
        assert table.min_pairwise_distance() >= table.distance_target()


class TestCensusCommand:
    def test_parity_only_census_signals_witnesses(self, runner, tmp_path):
        dec = tmp_path / "parity_only.json"
        result = runner.invoke(
            main,
            ["build-decoder", "--kind", "parity-only", "--s", "2",
             "--seed", "3", "--out", str(dec)],
        )
        assert result.exit_code == 0
        out = tmp_path / "census.json"
        result = runner.invoke(
            main, ["census", "--decoder", str(dec), "--n", "3", "--out", str(out)]
        )
        assert result.exit_code == 3  # witnesses found
        doc = json.loads(out.read_text())
        assert doc["witnesses"]
        assert doc["distinct_states"] == 2


class TestGaProbe:
    def test_probe_reports_failures(self, runner, tmp_path):
        out = tmp_path / "probe.json"
        result = runner.invoke(
            main,
            ["ga-probe", "--r", "3", "--s", "2", "--seed", "5",
             "--out", str(out)],
        )
        assert result.exit_code == 2  # attention alone cannot track parity
        doc = json.loads(out.read_text())
        assert doc["failure_count"] > 0


class TestBench:
    def test_bench_runs_and_matches(self, runner):
        result = runner.invoke(
            main, ["bench-kernels", "--size", "4096", "--repeat", "1"]
        )
        assert result.exit_code == 0, result.output
