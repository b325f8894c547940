#!/usr/bin/env python3
"""
Tests for the smallball command-line runner.
"""

import csv
import io
import json
import pytest

from smallball.cli import merge_config, build_parser, parse_value, run
from smallball.exceptions import InvalidParameterError


@pytest.fixture
def ones_file(tmp_path):
    """Weights file holding sixteen ones."""
    path = tmp_path / "ones.json"
    path.write_text(json.dumps({"entries": [1] * 16}))
    return str(path)


class TestParsing:
    """Tests for argument parsing and config merging."""

    def test_parse_value(self):
        """JSON values are decoded; anything else stays a string."""
        assert parse_value("3") == 3
        assert parse_value("[1, 2]") == [1, 2]
        assert parse_value("1/3") == "1/3"
        assert parse_value("exact") == "exact"

    def test_flags_override_config_file(self, tmp_path):
        """Command-line flags win over the --config file."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"inputs": {"dist": "bernoulli"}, "params": {"tau": 1, "m": 2}, "seed": 5}))
        args = build_parser().parse_args(["q", "--config", str(path), "--dist", "rademacher", "--tau", "0",
                                          "--set", "samples=100"])
        data = merge_config(args)
        assert data["command"] == "q"
        assert data["inputs"] == {"dist": "rademacher"}
        assert data["params"] == {"tau": 0, "m": 2, "samples": 100}
        assert data["seed"] == 5

    def test_set_needs_equals(self):
        """--set items must be KEY=VALUE."""
        args = build_parser().parse_args(["q", "--set", "tau"])
        with pytest.raises(InvalidParameterError):
            merge_config(args)


class TestRun:
    """Tests for running commands end to end."""

    def test_no_command(self, capsys):
        """A missing command is a usage error."""
        assert run([]) == 2

    def test_unknown_command(self, capsys):
        """argparse rejects unknown commands with status 2."""
        assert run(["median"]) == 2

    def test_missing_input_file(self, tmp_path, capsys):
        """Configurations naming missing files are invalid."""
        assert run(["q", "--dist", "rademacher", "--weights", str(tmp_path / "nope.json"), "--tau", "0"]) == 2

    def test_stochastic_command_needs_seed(self, tmp_path, capsys):
        """plant draws random numbers, so a seed is required."""
        assert run(["--datadir", str(tmp_path), "plant", "--rank", "1", "--n", "5"]) == 2

    def test_missing_parameter(self, tmp_path, capsys):
        """A command missing a required parameter exits with 2."""
        assert run(["--datadir", str(tmp_path), "q", "--dist", "rademacher"]) == 2

    def test_computation_failure(self, tmp_path, ones_file, capsys):
        """Unsupported ranks are computation failures."""
        assert run(["--datadir", str(tmp_path), "beta", "--weights", ones_file, "--r", "9", "--m", "3"]) == 1

    def test_q_json(self, tmp_path, ones_file, capsys):
        """Q of sixteen Rademacher signs is printed exactly."""
        status = run(["--datadir", str(tmp_path), "q", "--dist", "rademacher", "--weights", ones_file,
                      "--tau", "0"])
        assert status == 0
        record = json.loads(capsys.readouterr().out)
        assert record["value"] == "6435/32768"
        assert record["method"] == "exact"

    def test_q_csv(self, tmp_path, capsys):
        """CSV output is long-form with a header row."""
        status = run(["--datadir", str(tmp_path), "q", "--dist", "rademacher", "--tau", "0", "--format", "csv"])
        assert status == 0
        rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
        assert rows[0] == ["command", "inequality_id", "quantity", "value", "params"]
        assert rows[1][:4] == ["q", "", "q", "1/2"]
        assert json.loads(rows[1][4]) == {"tau": 0}

    def test_output_and_manifest(self, tmp_path, capsys):
        """--output writes the result and a manifest next to it."""
        out = tmp_path / "plant.json"
        status = run(["--datadir", str(tmp_path), "plant", "--rank", "1", "--n", "10", "--seed", "7",
                      "-o", str(out)])
        assert status == 0
        assert capsys.readouterr().out == ""
        record = json.loads(out.read_text())
        assert len(record["weights"]["entries"]) == 10

        manifest = json.loads((tmp_path / "plant.json.manifest.json").read_text())
        assert set(manifest) == {"config", "seed", "timestamp", "tool", "version"}
        assert manifest["seed"] == 7
        assert manifest["tool"] == "smallball"
        assert manifest["config"]["command"] == "plant"

    def test_seeded_output_is_reproducible(self, tmp_path, capsys):
        """Identical seeded runs give byte-identical result files."""
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        for out in (first, second):
            assert run(["--datadir", str(tmp_path), "plant", "--rank", "2", "--n", "12", "--seed", "42",
                        "--noise", "0.25", "-o", str(out)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_sweep_from_config(self, tmp_path, capsys):
        """A sweep configuration file produces one block of rows per cell."""
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps({
            "inputs": {"dist": "rademacher"},
            "params": {"operation": "q"},
            "grid": {"tau": [0, 2]},
            "format": "csv",
        }))
        assert run(["--datadir", str(tmp_path), "sweep", "--config", str(path), "--threads", "2"]) == 0
        rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
        assert rows[0] == ["cell", "operation", "tau", "inequality_id", "quantity", "value", "params"]
        q_rows = [r for r in rows[1:] if r[4] == "q"]
        assert [(r[0], r[2], r[5]) for r in q_rows] == [("0", "0", "1/2"), ("1", "2", "1")]

    @pytest.mark.parametrize("command", ["q", "smooth", "lemma1", "thm1", "fit", "thm2", "thm3", "thm4", "beta",
                                         "plant", "sweep"])
    def test_every_command_is_accepted(self, command, capsys):
        """Each named sub-command parses and prints its help."""
        assert run([command, "--help"]) == 0
        assert command in capsys.readouterr().out

    def test_thm1_report_csv(self, tmp_path, ones_file, capsys):
        """thm1 rows carry the thm1 inequality id."""
        status = run(["--datadir", str(tmp_path), "thm1", "--dist", "rademacher", "--weights", ones_file,
                      "--tau", "0", "--kappa", "1", "--delta", "1", "--r", "1", "--m", "3", "--format", "csv"])
        assert status == 0
        rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
        assert {r[1] for r in rows[1:]} == {"thm1"}
