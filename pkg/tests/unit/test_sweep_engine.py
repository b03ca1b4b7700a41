# tests/unit/test_sweep_engine.py

import json

import pandas as pd
import pytest

from app.schemas.config import SweepFilters, SweepSpec
from app.services.config_service import config_id, load_sweep
from app.services.sweep_engine import run_sweep, sidecar_paths, write_sweep
from app.utils.table_io import METRIC_COLUMNS, SCHEMA_PREFIX, read_table


def _spec(parameters: dict, **filters) -> SweepSpec:
    return SweepSpec(name="unit", parameters=parameters, filters=SweepFilters(**filters))


@pytest.fixture(scope="module")
def small_result(node_1znm, hbm3):
    spec = _spec({"inter_bank.ranks": [1, 2, 4], "bank.subarrays_per_bank": [8, 16]})
    return run_sweep(spec, node_1znm, jobs=1, baseline=hbm3)


class TestRunSweep:
    """Test suite for running sweeps into a metrics table."""

    def test_baseline_only(self, node_1znm):
        """Test that the one-point sweep emits the baseline row."""
        result = run_sweep(load_sweep("baseline_only"), node_1znm, jobs=1)
        assert len(result.table) == 1
        row = result.table.iloc[0]
        assert row["tier"] == "A"
        assert row["bandwidth_gbs"] == pytest.approx(1024.0)
        assert result.counts.cartesian == 1
        assert result.counts.emitted == 1
        assert result.skipped == []

    def test_row_order_follows_cartesian_index(self, small_result, hbm3):
        table = small_result.table
        assert len(table) == 6
        assert list(table["inter_bank.ranks"]) == [1, 1, 2, 2, 4, 4]
        assert list(table["bank.subarrays_per_bank"]) == [8, 16, 8, 16, 8, 16]
        baseline_row = table[(table["inter_bank.ranks"] == 2) & (table["bank.subarrays_per_bank"] == 16)]
        assert baseline_row["config_id"].item() == config_id(hbm3)

    def test_columns(self, small_result):
        columns = list(small_result.table.columns)
        assert columns[: len(METRIC_COLUMNS)] == METRIC_COLUMNS
        assert "mat.dlomat_enabled" in columns

    def test_stack_height_filter(self, node_1znm, hbm3):
        """Test that eight ranks of four dies is a 32-high stack and gets filtered."""
        result = run_sweep(_spec({"inter_bank.ranks": [2, 8]}), node_1znm, jobs=1, baseline=hbm3)
        assert result.counts.stack_height == 1
        assert result.skipped[0].index == 1
        assert result.skipped[0].reason == "stack_height"

    def test_every_index_is_accounted_for(self, node_1znm, hbm3):
        """Test that every cartesian index is emitted or logged as skipped."""
        spec = _spec(
            {
                "inter_bank.channels": [6, 16],
                "mat.mdls_per_mat": [8, 32],
                "mat.ldls_per_mat": [8, 32],
            }
        )
        result = run_sweep(spec, node_1znm, jobs=1, baseline=hbm3)
        counts = result.counts
        assert counts.cartesian == 8
        assert counts.emitted + counts.filtered == counts.cartesian
        # six channels never split over four per die; 32 MDLs without 32 LDLs fail validation
        assert counts.invalid == 5
        assert counts.routing_infeasible == 1
        assert counts.emitted == 2
        skipped_indices = sorted(record.index for record in result.skipped)
        assert skipped_indices == [0, 1, 2, 3, 6, 7]
        assert [record.index for record in result.skipped if record.reason == "routing_infeasible"] == [7]

    def test_die_size_filter(self, node_1znm, hbm3):
        result = run_sweep(_spec({"inter_bank.ranks": [2]}, max_die_len_mm=5.0), node_1znm, jobs=1, baseline=hbm3)
        assert result.counts.die_size == 1
        assert result.table.empty
        assert "exceeds" in result.skipped[0].detail

    def test_progress_reports_every_point(self, node_1znm, hbm3):
        seen = []
        spec = _spec({"inter_bank.ranks": [1, 2, 4, 8]})
        run_sweep(spec, node_1znm, jobs=1, chunk_size=3, baseline=hbm3, progress=seen.append)
        assert seen == [3, 1]

    def test_worker_count_does_not_change_table(self, node_1znm, hbm3, small_result):
        """Test that the table is identical for one and several workers."""
        spec = _spec({"inter_bank.ranks": [1, 2, 4], "bank.subarrays_per_bank": [8, 16]})
        parallel = run_sweep(spec, node_1znm, jobs=2, chunk_size=2, baseline=hbm3)
        pd.testing.assert_frame_equal(parallel.table, small_result.table)
        assert parallel.counts == small_result.counts


class TestWriteSweep:
    """Test suite for writing sweep tables and their sidecars."""

    def test_sidecars(self, tmp_path, small_result):
        """Test that counts and skipped designs are written next to the table."""
        out = tmp_path / "sweep.csv"
        written = write_sweep(small_result, out, jsonl=True)
        skipped_path, counts_path = sidecar_paths(out)
        assert written == [out, skipped_path, counts_path, out.with_suffix(".jsonl")]
        counts = json.loads(counts_path.read_text())
        assert counts["cartesian"] == 6
        assert counts["filtered"] == 0
        assert len(out.with_suffix(".jsonl").read_text().splitlines()) == 6

    def test_table_round_trip(self, tmp_path, small_result):
        out = tmp_path / "sweep.csv"
        write_sweep(small_result, out)
        assert out.read_text().splitlines()[0].startswith(SCHEMA_PREFIX)
        table = read_table(out)
        assert list(table["config_id"]) == list(small_result.table["config_id"])
        assert list(table["bandwidth_gbs"]) == pytest.approx(list(small_result.table["bandwidth_gbs"]))
        assert list(table["tier"]) == list(small_result.table["tier"])
