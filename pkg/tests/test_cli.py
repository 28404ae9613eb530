import json
from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner

from cli import cli
from utils import _merge


@pytest.fixture
def runner():
    # click 8.2 dropped mix_stderr and always captures stderr on its own
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:
        return CliRunner()


@pytest.fixture
def invoke(runner, config_file):
    def run(*args):
        return runner.invoke(cli, ["--config", config_file, *args])
    return run


def write_config(tmp_path, config, override, name="override.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(_merge(config, override)))
    return str(path)


class TestInvariants:
    def test_split_json(self, invoke):
        result = invoke("invariants", "--space", "zk:1", "--j", "3")
        assert result.exit_code == 0, result.stderr
        data = json.loads(result.stdout)
        assert data["schema"] == 1
        assert (data["w"], data["h"], data["chi"], data["h1End"]) == (6, 3, 9, 15)
        assert data["delta"] == [0, 0]
        assert data["seed"] is None

    def test_random_class(self, invoke):
        result = invoke("invariants", "--space", "w1", "--j", "2", "--class", "random:4")
        assert result.exit_code == 0, result.stderr
        data = json.loads(result.stdout)
        assert data["w"] == 0
        assert data["chi"] == 1
        assert data["seed"] == 4

    def test_type_below_k(self, invoke):
        data = json.loads(invoke("invariants", "--space", "zk:4", "--j", "2", "--class", "random:1").stdout)
        assert (data["w"], data["h"]) == (0, 1)

    def test_flop_height_within_bounds(self, invoke):
        data = json.loads(invoke("invariants", "--space", "w1", "--j", "3", "--class", "random:7").stdout)
        assert 2 <= data["h"] <= 4

    def test_polynomial_class(self, invoke):
        result = invoke("invariants", "--space", "zk:1", "--j", "2", "--class", "u*z^-1", "--format", "csv")
        assert result.exit_code == 0, result.stderr
        header, row = result.stdout.strip().splitlines()
        assert header == "space,j,class,w,h,chi,h1End,delta,seed"
        assert row.startswith("zk:1,2,")

    def test_malformed_class(self, invoke):
        result = invoke("invariants", "--space", "zk:1", "--j", "2", "--class", "u*z^")
        assert result.exit_code == 1
        assert "grammar" in result.stderr

    def test_errors_stay_off_stdout(self, invoke):
        result = invoke("invariants", "--space", "p2", "--j", "2")
        assert result.stdout == ""
        assert result.stderr

    def test_unknown_space(self, invoke):
        result = invoke("invariants", "--space", "p2", "--j", "2")
        assert result.exit_code == 1
        assert "✗ Error" in result.stderr

    def test_truncation_overflow(self, runner, tmp_path, config):
        path = write_config(tmp_path, config, {"cech": {"max_rounds": 1}})
        result = runner.invoke(cli, ["--config", path, "invariants", "--space", "zk:1", "--j", "3"])
        assert result.exit_code == 2

    def test_results_cache_from_environment(self, invoke, tmp_path, monkeypatch):
        cache = tmp_path / "env" / "cache.jsonl"
        monkeypatch.setenv("SHEAF_CACHE", str(cache))
        first = invoke("invariants", "--space", "zk:2", "--j", "2")
        second = invoke("invariants", "--space", "zk:2", "--j", "2")
        assert first.exit_code == 0 and second.exit_code == 0
        assert first.stdout == second.stdout
        assert len(cache.read_text().splitlines()) == 1

    def test_cache_option(self, invoke, tmp_path):
        cache = tmp_path / "opt.jsonl"
        result = invoke("--cache", str(cache), "invariants", "--space", "zk:3", "--j", "1")
        assert result.exit_code == 0, result.stderr
        assert Path(cache).exists()


class TestFormulaCommands:
    def test_genfun_csv(self, invoke):
        result = invoke("genfun", "--space", "zk:1", "--kind", "generic", "--jmax", "4", "--format", "csv")
        assert result.exit_code == 0, result.stderr
        lines = result.stdout.strip().splitlines()
        assert lines[0] == "j,a_j"
        assert "3,9" in lines
        assert len(lines) == 5

    def test_genfun_delta(self, invoke):
        result = invoke("genfun", "--space", "w1", "--kind", "delta", "--jmax", "3")
        data = json.loads(result.stdout)
        assert data["coefficients"][-1] == {"j": 3, "a_j": 18}

    def test_moduli(self, invoke):
        result = invoke("moduli", "--j", "4")
        assert result.exit_code == 0, result.stderr
        data = json.loads(result.stdout)
        assert (data["projDim"], data["chi"], data["gamma1"]) == (11, 3, 12)

    def test_moduli_not_ample(self, invoke):
        data = json.loads(invoke("moduli", "--j", "3", "--conormal", "w2").stdout)
        assert data["gammaFull"] == "infinite"
        assert data["gamma1"] == 8

    def test_hilbert(self, invoke):
        result = invoke("hilbert", "--space", "w1", "--m", "2", "--j", "2")
        assert result.exit_code == 0, result.stderr
        data = json.loads(result.stdout)
        assert data["matches"] is True
        assert data["closedForm"] == [28, 12]

    def test_hilbert_needs_three_twists(self, invoke):
        result = invoke("hilbert", "--space", "zk:1", "--m", "1", "--n", "0,1")
        assert result.exit_code == 1


class TestHarnessCommands:
    def test_gap(self, invoke):
        result = invoke("gap", "--k", "2", "--jmax", "4")
        assert result.exit_code == 0, result.stderr
        data = json.loads(result.stdout)
        assert data["minChi"] == 1
        assert data["verdict"] == "pass"

    @pytest.mark.slow
    def test_gap_on_z3(self, invoke):
        data = json.loads(invoke("gap", "--k", "3", "--jmax", "6", "--samples", "50").stdout)
        assert data["minChi"] == 2
        assert data["verdict"] == "pass"

    def test_gap_on_z1(self, invoke):
        assert invoke("gap", "--k", "1", "--jmax", "3").exit_code == 1

    def test_pencil(self, invoke):
        result = invoke("pencil", "--j", "3", "--c", "0,1,inf", "--format", "csv")
        assert result.exit_code == 0, result.stderr
        lines = result.stdout.strip().splitlines()
        assert lines[0] == "c,w,h"
        assert lines[1:] == ["0,6,3", "1,6,3", "inf,6,3"]

    def test_scan_pairs(self, invoke):
        result = invoke("scan", "--k", "2", "--j", "2", "--pairs", "--samples", "1")
        assert result.exit_code == 0, result.stderr
        assert sum(p["count"] for p in json.loads(result.stdout)["pairs"]) == 2

    def test_witness_nonempty(self, invoke):
        result = invoke("witness", "--claim", "nonempty", "--n", "2", "--k", "3")
        assert result.exit_code == 0, result.stderr
        assert json.loads(result.stdout)["verdict"] == "pass"

    def test_witness_missing_arguments(self, invoke):
        result = invoke("witness", "--claim", "flop")
        assert result.exit_code == 1

    def test_table1_row(self, invoke):
        result = invoke("table1", "--space", "Z3", "--format", "csv")
        assert result.exit_code == 0, result.stderr
        lines = result.stdout.strip().splitlines()
        assert lines[0] == "space,kind,w,h,h1end"
        assert lines[1] == "Z3,split,1,2,7"

    def test_table1_mismatch(self, runner, tmp_path, config):
        path = write_config(tmp_path, config, {"table1": {"expected": {"Z3": {"split": [1, 2, 8]}}}})
        result = runner.invoke(cli, ["--config", path, "table1", "--space", "Z3", "--samples", "1"])
        assert result.exit_code == 3
        assert "table mismatch" in result.stderr

    def test_sweep(self, invoke):
        result = invoke("sweep", "--space", "zk:2", "--jmax", "2", "--samples", "1")
        assert result.exit_code == 0, result.stderr
        assert [row["violations"] for row in json.loads(result.stdout)["rows"]] == [[], []]

    @pytest.mark.slow
    def test_reruns_are_byte_identical(self, invoke):
        first = invoke("table1", "--format", "json")
        second = invoke("table1", "--format", "json")
        assert first.exit_code in (0, 3)
        assert first.stdout == second.stdout


def test_version(invoke):
    result = invoke("version")
    assert result.exit_code == 0
    assert result.stdout.startswith("Sheaf Invariants v1.0.0")
