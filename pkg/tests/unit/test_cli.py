# tests/unit/test_cli.py

import json

import numpy as np
import pandas as pd
import pytest
from typer.testing import CliRunner

from app.core.cli import EXIT_FAILURE, EXIT_INPUT_ERROR, app
from app.models.enums import Tier
from app.services.config_service import config_id, serialize_config
from app.utils.table_io import read_table, write_table

runner = CliRunner()


@pytest.fixture
def table_path(tmp_path, hbm3):
    """A 40-row synthetic metrics table whose first row is the HBM3 baseline."""
    rng = np.random.default_rng(21)
    rows = 40
    frame = pd.DataFrame(
        {
            "config_id": [config_id(hbm3)] + [f"d{i:03d}" for i in range(1, rows)],
            "tier": [tier.value for tier in Tier for _ in range(rows // len(Tier))],
            "bandwidth_gbs": rng.uniform(500.0, 3000.0, rows),
            "capacity_gb": rng.choice([4.0, 8.0, 16.0, 24.0, 32.0], rows),
            "epb_closed": rng.uniform(1.0, 4.0, rows),
            "epb_full": rng.uniform(0.5, 2.0, rows),
            "miss_latency_ns": rng.uniform(45.0, 80.0, rows),
            "total_area_mm2": rng.uniform(500.0, 1500.0, rows),
            "power_w": rng.uniform(10.0, 60.0, rows),
        }
    )
    # the baseline sits mid-range on everything
    frame.loc[0, ["bandwidth_gbs", "capacity_gb", "epb_closed", "power_w"]] = [1024.0, 16.0, 3.0, 24.6]
    return write_table(frame, tmp_path / "table.csv")


class TestEvaluateCommand:
    """Test suite for the evaluate command."""

    def test_baseline_with_dumps(self, tmp_path):
        """Test that evaluate writes the metrics and every requested dump."""
        out = tmp_path / "metrics.json"
        result = runner.invoke(
            app, ["evaluate", "--out", str(out), "--dump-floorplan", "--dump-routing", "--dump-energy"]
        )
        assert result.exit_code == 0, result.output
        metrics = json.loads(out.read_text())
        assert metrics["bandwidth_gbs"] == pytest.approx(1024.0)
        assert metrics["tier"] == "A"
        floorplan = json.loads((tmp_path / "metrics.floorplan.json").read_text())
        assert floorplan["die_area"] == pytest.approx(111.0, rel=1e-3)
        routing = json.loads((tmp_path / "metrics.routing.json").read_text())
        assert routing["mat"]["scheme"] == "conventional"
        assert len(routing["datapath"]) == 4
        energy = json.loads((tmp_path / "metrics.energy.json").read_text())
        assert [stage["stage"] for stage in energy["stages"]] == ["MDL", "BGBUS", "GBUS", "TSV", "DQ"]
        assert "ACT.BL" in energy["events"]

    def test_missing_config(self):
        """Test that an unknown config is an input error."""
        result = runner.invoke(app, ["evaluate", "--config", "no_such_design"])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_missing_node(self):
        result = runner.invoke(app, ["evaluate", "--node", "no_such_node"])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_unwritable_output(self, tmp_path):
        """Test that an output path under a regular file is an input error, not a traceback."""
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        result = runner.invoke(app, ["evaluate", "--out", str(blocker / "metrics.json")])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_invalid_config(self, tmp_path, hbm3_data):
        hbm3_data["inter_bank"]["channels"] = 6
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(hbm3_data))
        result = runner.invoke(app, ["evaluate", "--config", str(path)])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_infeasible_design(self, tmp_path, hbm3):
        """Test that an unroutable design exits with the failure code."""
        data = serialize_config(hbm3)
        data["mat"].update(mdls_per_mat=32, ldls_per_mat=32)
        path = tmp_path / "wide.json"
        path.write_text(json.dumps(data))
        result = runner.invoke(app, ["evaluate", "--config", str(path)])
        assert result.exit_code == EXIT_FAILURE


class TestValidateCommand:
    """Test suite for the validate command."""

    def test_bundled_targets(self, tmp_path):
        """Test that the bundled targets pass and are written to the report."""
        out = tmp_path / "validation.json"
        result = runner.invoke(app, ["validate", "--out", str(out)])
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text())
        assert all(target["passed"] for target in report["targets"])

    def test_out_of_tolerance(self, tmp_path):
        """Test that a gating metric out of tolerance exits with the failure code."""
        suite = {
            "name": "strict",
            "targets": [
                {
                    "name": "HBM3",
                    "config_path": "hbm3_baseline",
                    "node": "2ynm",
                    "node_scaling": "1znm_scaling",
                    "expected": {"die_area_mm2": 100.0},
                    "tolerances": {"die_area_mm2": 0.01},
                }
            ],
        }
        path = tmp_path / "strict.json"
        path.write_text(json.dumps(suite))
        result = runner.invoke(app, ["validate", "--targets", str(path)])
        assert result.exit_code == EXIT_FAILURE

    def test_malformed_suite(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{ not json")
        result = runner.invoke(app, ["validate", "--targets", str(path)])
        assert result.exit_code == EXIT_INPUT_ERROR


class TestSweepCommand:
    """Test suite for the sweep command."""

    def test_baseline_only(self, tmp_path):
        """Test that a one-point sweep writes the table, counts and skipped log."""
        out = tmp_path / "sweep.csv"
        result = runner.invoke(app, ["sweep", "--sweep", "baseline_only", "--out", str(out), "--jobs", "1"])
        assert result.exit_code == 0, result.output
        table = read_table(out)
        assert len(table) == 1
        assert (tmp_path / "sweep.counts.json").exists()
        assert (tmp_path / "sweep.skipped.jsonl").exists()

    def test_unknown_parameter(self, tmp_path):
        """Test that a sweep naming an unknown field is an input error."""
        spec = tmp_path / "bad_sweep.json"
        spec.write_text(json.dumps({"name": "bad", "parameters": {"inter_bank.speed": [1, 2]}}))
        result = runner.invoke(app, ["sweep", "--sweep", str(spec), "--out", str(tmp_path / "x.csv"), "--jobs", "1"])
        assert result.exit_code == EXIT_INPUT_ERROR


class TestAnalysisCommands:
    """Test suite for the commands that analyse a metrics table."""

    def test_pareto(self, tmp_path, table_path):
        out = tmp_path / "front.csv"
        result = runner.invoke(
            app, ["pareto", "--table", str(table_path), "--x", "bandwidth_gbs", "--y", "epb_closed", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        front = read_table(out)
        assert 0 < len(front) < 40
        assert list(front.columns) == ["config_id", "bandwidth_gbs", "epb_closed", "tier"]

    def test_pareto_per_tier(self, tmp_path, table_path):
        out = tmp_path / "front.csv"
        result = runner.invoke(
            app,
            ["pareto", "--table", str(table_path), "--x", "bandwidth_gbs", "--y", "power_w", "--per-tier", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        for tier in Tier:
            assert (tmp_path / f"front.tier_{tier.value}.csv").exists()

    def test_pareto_scenario(self, table_path):
        result = runner.invoke(app, ["pareto", "--table", str(table_path), "--scenario", "server_gpu"])
        assert result.exit_code == 0, result.output

    def test_pareto_unknown_metric(self, table_path):
        result = runner.invoke(app, ["pareto", "--table", str(table_path), "--x", "bandwidth_gbs", "--y", "speed"])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_pareto_needs_axes(self, table_path):
        result = runner.invoke(app, ["pareto", "--table", str(table_path)])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_empty_table(self, tmp_path):
        path = write_table(pd.DataFrame(columns=["config_id", "tier", "bandwidth_gbs"]), tmp_path / "empty.csv")
        result = runner.invoke(app, ["pareto", "--table", str(path), "--x", "bandwidth_gbs", "--y", "epb_closed"])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_project_all_pairs(self, tmp_path, table_path):
        out = tmp_path / "projections"
        result = runner.invoke(app, ["project", "--table", str(table_path), "--all-pairs", "--out", str(out)])
        assert result.exit_code == 0, result.output
        files = sorted(path.name for path in out.glob("*.csv"))
        assert len(files) == 10
        assert "bandwidth_gbs__capacity_gb.csv" in files

    def test_project_same_metric(self, tmp_path, table_path):
        result = runner.invoke(
            app,
            ["project", "--table", str(table_path), "--x", "edp", "--y", "edp", "--out", str(tmp_path / "p.csv")],
        )
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_hull(self, tmp_path, table_path):
        """Test that hull reports one fraction per tier ending at 1."""
        out = tmp_path / "hull.json"
        result = runner.invoke(
            app, ["hull", "--table", str(table_path), "--samples", "5000", "--seed", "1", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text())
        assert [entry["tier"] for entry in report["hull"]] == ["A", "B", "C", "D", "E"]
        assert report["hull"][-1]["volume_fraction"] == 1.0
        assert report["ranges"]

    def test_hull_bad_membership(self, table_path):
        result = runner.invoke(app, ["hull", "--table", str(table_path), "--samples", "100", "--membership", "exact"])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_case_study(self, tmp_path, table_path, hbm3):
        """Test that the case study counts survivors per tier and writes them."""
        out = tmp_path / "case.json"
        survivors = tmp_path / "survivors.csv"
        result = runner.invoke(
            app, ["case-study", "--table", str(table_path), "--survivors", str(survivors), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        summary = json.loads(out.read_text())
        assert summary["baseline_id"] == config_id(hbm3)
        assert summary["designs"] == 40
        assert summary["survivors"] == len(read_table(survivors))
        assert summary["survivors"] >= 1
        assert sum(summary["survivors_per_tier"].values()) == summary["survivors"]

    def test_case_study_without_baseline_row(self, tmp_path, table_path):
        """Test that a table without the baseline row is an input error."""
        table = read_table(table_path).iloc[1:]
        path = write_table(table, tmp_path / "no_base.csv")
        result = runner.invoke(app, ["case-study", "--table", str(path)])
        assert result.exit_code == EXIT_INPUT_ERROR


class TestCatalog:
    """Test suite for the bundled document catalog."""

    def test_no_command_shows_catalog(self):
        result = runner.invoke(app, [])
        assert result.exit_code == 0
        assert "hbm3_baseline" in result.output
