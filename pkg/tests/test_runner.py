#!/usr/bin/env python3
"""
Tests for command execution and parameter sweeps.
"""

import json
import pytest
from fractions import Fraction

from smallball.config import SmallballConfig
from smallball.exceptions import InvalidParameterError
from smallball.models.experiment import ExperimentConfig
from smallball.models.reports import InequalityId
from smallball.runner import execute, row_fields, run_sweep, run_sweep_async, sweep_cells
from smallball.utils import derive_seed


@pytest.fixture
def settings(tmp_path):
    """Settings with no config file and no environment overrides."""
    return SmallballConfig(datadir=tmp_path, use_env=False)


@pytest.fixture
def ones_file(tmp_path):
    """Weights file holding sixteen ones."""
    path = tmp_path / "ones.json"
    path.write_text(json.dumps({"entries": [1] * 16}))
    return str(path)


class TestExecute:
    """Tests for single-command execution."""

    def test_q_on_weighted_sum(self, ones_file, settings):
        """Q of sixteen Rademacher signs at tau = 0."""
        outcome = execute("q", {"dist": "rademacher", "weights": ones_file}, {"tau": 0}, settings=settings)
        assert outcome.record["value"] == "6435/32768"
        assert outcome.record["method"] == "exact"
        assert outcome.rows[0] == {"inequality_id": "", "quantity": "q", "value": Fraction(6435, 32768)}

    def test_q_on_distribution(self, settings):
        """Without weights Q is taken of the law itself."""
        outcome = execute("q", {"dist": "rademacher"}, {"tau": 2}, settings=settings)
        assert outcome.record["value"] == "1"

    def test_plant_is_deterministic(self, settings):
        """The seed fixes the planted instance."""
        params = {"rank": 1, "n": 10, "generators": [2], "limits": [3]}
        first = execute("plant", {}, params, seed=3, settings=settings)
        second = execute("plant", {}, params, seed=3, settings=settings)
        assert first.record == second.record
        assert len(first.record["weights"]["entries"]) == 10
        assert first.rows == [{"inequality_id": "", "quantity": "outliers", "value": 0}]

    def test_smooth_reports_atom(self, tmp_path, settings):
        """smooth returns the mass at zero with its error."""
        path = tmp_path / "w.json"
        path.write_text(json.dumps({"entries": [1]}))
        outcome = execute("smooth", {"weights": str(path)}, {"lambda": 4, "t": 0}, settings=settings)
        assert "mass_at_zero" in outcome.record
        assert outcome.record["cf"] == pytest.approx(1.0)
        assert [r["quantity"] for r in outcome.rows] == ["mass_at_zero", "mass_at_zero_error", "cf"]

    def test_report_rows(self, ones_file, settings):
        """Bound reports expand into lhs, rhs, constant and vacuous rows."""
        outcome = execute("thm1", {"dist": "rademacher", "weights": ones_file},
                          {"tau": 0, "kappa": 1, "delta": 1, "r": 1, "m": 3}, settings=settings)
        assert [r["quantity"] for r in outcome.rows] == ["lhs", "rhs_unconstanted", "implied_constant", "vacuous"]
        assert all(r["inequality_id"] == "thm1" for r in outcome.rows)
        assert outcome.rows[-1]["value"] is True

    def test_unknown_command(self, settings):
        """Unknown commands are rejected."""
        with pytest.raises(InvalidParameterError):
            execute("median", {}, {}, settings=settings)

    def test_inequality_vocabulary(self):
        """Report ids use the fixed external names."""
        assert {i.value for i in InequalityId} == {
            "lemma1", "eq11366", "thm1", "thm2", "thm3", "thm4", "eq12sp", "window-regularity", "coordinate-product",
        }

    def test_missing_parameter(self, settings):
        """Required parameters are named in the error."""
        with pytest.raises(InvalidParameterError, match="tau"):
            execute("q", {"dist": "rademacher"}, {}, settings=settings)


class TestSweep:
    """Tests for parameter sweeps."""

    def test_cells_last_axis_fastest(self):
        """Cells follow the grid axes with the last one varying fastest."""
        cells = sweep_cells({"tau": [0, 1], "m": [1, 2, 3]})
        assert cells[:3] == [{"tau": 0, "m": 1}, {"tau": 0, "m": 2}, {"tau": 0, "m": 3}]
        assert cells[3] == {"tau": 1, "m": 1}
        assert len(cells) == 6

    def _config(self, seed=None):
        return ExperimentConfig(command="sweep", inputs={"dist": "rademacher"},
                                params={"operation": "q"}, grid={"tau": [0, 1, 2]}, seed=seed)

    @pytest.mark.asyncio
    async def test_rows_in_cell_order(self, settings):
        """Rows come back in cell order whatever the thread count."""
        rows = await run_sweep_async(self._config(), threads=2, settings=settings)
        q_rows = [r for r in rows if r["quantity"] == "q"]
        assert [r["cell"] for r in q_rows] == [0, 1, 2]
        assert [r["value"] for r in q_rows] == [Fraction(1, 2), Fraction(1, 2), 1]
        assert all(r["operation"] == "q" for r in rows)
        assert [r["tau"] for r in q_rows] == [0, 1, 2]

    @pytest.mark.asyncio
    async def test_thread_count_does_not_change_rows(self, settings):
        """One worker and three workers give the same rows."""
        config = self._config(seed=9)
        serial = await run_sweep_async(config, threads=1, settings=settings)
        parallel = await run_sweep_async(config, threads=3, settings=settings)
        assert serial == parallel

    def test_cell_seeds_are_derived(self, settings):
        """Each cell echoes derive_seed(seed, cell) in its params."""
        rows = run_sweep(self._config(seed=9), threads=2, settings=settings)
        for row in rows:
            assert json.loads(row["params"])["seed"] == derive_seed(9, row["cell"])

    def test_row_fields(self):
        """The CSV header puts the grid axes before the long-form columns."""
        assert row_fields(self._config()) == ["cell", "operation", "tau", "inequality_id", "quantity", "value",
                                              "params"]

    def test_sweep_needs_operation(self):
        """A sweep without an operation is an invalid configuration."""
        with pytest.raises(ValueError):
            ExperimentConfig(command="sweep", inputs={"dist": "rademacher"}, params={}, grid={"tau": [0]})
