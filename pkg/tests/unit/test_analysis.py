# tests/unit/test_analysis.py

import itertools

import numpy as np
import pandas as pd
import pytest

from app.core.exceptions import AnalysisError, UnknownMetricError
from app.models.enums import Direction, Tier
from app.schemas.analysis import Constraint
from app.services.analysis import (
    HULL_METRICS,
    SCENARIOS,
    best_survivors,
    estimate_hull_fraction,
    find_baseline_row,
    flag_pareto_front,
    get_scenario,
    hull_equations,
    hull_volume_fractions,
    iso_filter,
    metric_pairs,
    minimization_matrix,
    monte_carlo_hits,
    normalize,
    pareto_front,
    pareto_per_tier,
    project,
    scenario_fronts,
    tier_ranges,
    tier_subset,
)

COLUMNS = ["config_id", "tier", "bandwidth_gbs", "capacity_gb", "epb_closed", "miss_latency_ns", "total_area_mm2", "power_w"]

ROWS = [
    ("base", "A", 1024.0, 16.0, 3.0, 64.0, 888.0, 24.6),
    ("b1", "B", 1536.0, 16.0, 2.5, 60.0, 900.0, 24.0),
    ("c1", "C", 2048.0, 8.0, 2.0, 58.0, 700.0, 26.0),
    ("d1", "D", 2048.0, 24.0, 2.8, 70.0, 1200.0, 22.0),
    ("e1", "E", 3072.0, 16.0, 1.5, 55.0, 1000.0, 40.0),
]

SERVER_GPU = [
    Constraint(metric="bandwidth_gbs", relation=">="),
    Constraint(metric="capacity_gb", relation=">="),
    Constraint(metric="power_w", relation="<="),
]


@pytest.fixture
def table():
    return pd.DataFrame.from_records(ROWS, columns=COLUMNS)


@pytest.fixture
def baseline_row(table):
    return find_baseline_row(table, "base")


def _random_tiered_table(seed: int, per_tier: int = 8) -> pd.DataFrame:
    rng = np.random.default_rng(seed)
    frames = []
    for tier in Tier:
        values = rng.random((per_tier, len(HULL_METRICS)))
        frame = pd.DataFrame(values, columns=HULL_METRICS)
        frame["tier"] = tier.value
        frames.append(frame)
    table = pd.concat(frames, ignore_index=True)
    table["config_id"] = [f"p{i}" for i in range(len(table))]
    return table


def _brute_force_front(points: np.ndarray) -> np.ndarray:
    """Pairwise dominance check of every point against every other (all minimized)."""
    keep = np.ones(len(points), dtype=bool)
    for i, point in enumerate(points):
        dominators = np.all(points <= point, axis=1) & np.any(points < point, axis=1)
        keep[i] = not dominators.any()
    return keep


class TestParetoFront:
    """Test suite for non-dominated filtering."""

    def test_mixed_directions(self):
        """Test that maximized objectives are flipped before the dominance check."""
        frame = pd.DataFrame({"a": [2.0, 1.0, 2.0], "b": [2.0, 1.0, 1.0]})
        front = pareto_front(frame, [("a", Direction.MAXIMIZE), ("b", Direction.MINIMIZE)])
        assert front.index.tolist() == [2]

    def test_single_row(self, table):
        front = pareto_front(table.iloc[:1], ["bandwidth_gbs", "epb_closed"])
        assert front["config_id"].tolist() == ["base"]

    def test_known_metric_directions(self, table):
        # e1 has the most bandwidth and the lowest energy
        front = pareto_front(table, ["bandwidth_gbs", "epb_closed"])
        assert front["config_id"].tolist() == ["e1"]

    @pytest.mark.parametrize("seed", [11, 12, 13])
    def test_matches_brute_force(self, seed):
        """Test that the front of 1000 random points equals the pairwise dominance oracle."""
        rng = np.random.default_rng(seed)
        objectives = ["bandwidth_gbs", "epb_closed", "miss_latency_ns"]
        frame = pd.DataFrame(rng.random((1000, 3)), columns=objectives)
        expected = _brute_force_front(minimization_matrix(frame, objectives))
        front = pareto_front(frame, objectives)
        assert front.index.tolist() == np.flatnonzero(expected).tolist()

    def test_matches_brute_force_with_ties(self):
        """Test that repeated coordinates keep every equal non-dominated point."""
        rng = np.random.default_rng(21)
        objectives = ["bandwidth_gbs", "epb_closed", "miss_latency_ns"]
        frame = pd.DataFrame(rng.integers(0, 6, size=(1000, 3)).astype(float), columns=objectives)
        expected = _brute_force_front(minimization_matrix(frame, objectives))
        assert pareto_front(frame, objectives).index.tolist() == np.flatnonzero(expected).tolist()

    def test_idempotent(self, table):
        """Test that the front of a front is itself."""
        objectives = ["bandwidth_gbs", "power_w"]
        front = pareto_front(table, objectives)
        pd.testing.assert_frame_equal(pareto_front(front, objectives), front)

    def test_dominated_point_changes_nothing(self, table):
        """Test that adding a dominated design leaves the front unchanged."""
        objectives = ["bandwidth_gbs", "power_w"]
        worse = pd.DataFrame.from_records([("w", "A", 512.0, 1.0, 9.0, 99.0, 2000.0, 90.0)], columns=COLUMNS)
        extended = pd.concat([table, worse], ignore_index=True)
        assert pareto_front(extended, objectives)["config_id"].tolist() == pareto_front(table, objectives)[
            "config_id"
        ].tolist()

    def test_equal_points_are_all_kept(self):
        """Test that equal points survive together unless asked otherwise."""
        points = np.array([[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]])
        assert flag_pareto_front(points).tolist() == [True, True, False]
        assert flag_pareto_front(points, keep_equal=False).sum() == 1

    def test_needs_two_objectives(self, table):
        with pytest.raises(AnalysisError):
            pareto_front(table, ["bandwidth_gbs"])

    def test_empty_table(self, table):
        with pytest.raises(AnalysisError):
            pareto_front(table.iloc[:0], ["bandwidth_gbs", "epb_closed"])

    def test_unknown_metric(self, table):
        with pytest.raises(UnknownMetricError, match="Valid options"):
            pareto_front(table, ["bandwidth_gbs", "speed"])


class TestTiers:
    """Test suite for cumulative tier subsets."""

    def test_tiers_nest(self, table):
        """Test that each tier contains the previous ones."""
        sizes = [len(tier_subset(table, tier)) for tier in Tier]
        assert sizes == [1, 2, 3, 4, 5]

    def test_per_tier_fronts(self, table):
        fronts = pareto_per_tier(table, ["bandwidth_gbs", "epb_closed"])
        ids = {tier.value: front["config_id"].tolist() for tier, front in fronts.items()}
        assert ids == {"A": ["base"], "B": ["b1"], "C": ["c1"], "D": ["c1"], "E": ["e1"]}

    def test_empty_tier_is_skipped(self, table):
        """Test that per-tier fronts skip tiers without points."""
        fronts = pareto_per_tier(table[table["tier"] != "A"], ["bandwidth_gbs", "epb_closed"])
        assert Tier.A not in fronts
        assert Tier.B in fronts


class TestHullVolume:
    """Test suite for Monte Carlo hull volume estimation."""

    def test_normalize(self, table):
        """Test that every metric maps to [0, 1] and constant metrics to 0."""
        table = table.assign(capacity_gb=16.0)
        normalized = normalize(table)
        assert normalized.min() == 0.0
        assert normalized.max() == 1.0
        assert np.all(normalized[:, HULL_METRICS.index("capacity_gb")] == 0.0)

    def test_too_few_points(self):
        """Test that five points in five dimensions span no volume."""
        points = np.random.default_rng(0).random((5, 5))
        assert hull_equations(points) is None
        assert estimate_hull_fraction(points, 1000, seed=1) == (0.0, 0.0)

    def test_flat_points(self):
        points = np.random.default_rng(0).random((20, 5))
        points[:, 4] = 0.5
        assert hull_equations(points) is None

    def test_unit_cube(self):
        """Test that the hull of the cube corners holds every sample."""
        corners = np.array(list(itertools.product([0.0, 1.0], repeat=5)))
        fraction, error = estimate_hull_fraction(corners, 5000, seed=3)
        assert fraction == 1.0
        assert error == 0.0

    def test_simplex(self):
        """Test that the corner simplex of the 5-cube holds 1/5! of its volume within 2%."""
        points = np.vstack([np.zeros(5), np.eye(5)])
        fraction, error = estimate_hull_fraction(points, 4_000_000, seed=5)
        assert fraction == pytest.approx(1.0 / 120.0, rel=0.02)
        assert error < 0.02 / 120.0

    def test_lp_agrees_with_facets(self):
        """Test that the linear-program membership test matches the facet test."""
        triangle = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        facets, _ = estimate_hull_fraction(triangle, 400, seed=9)
        lp, _ = estimate_hull_fraction(triangle, 400, seed=9, membership="lp")
        assert lp == pytest.approx(facets, abs=2.5e-3)
        assert facets == pytest.approx(0.5, abs=0.1)

    def test_unknown_membership(self):
        with pytest.raises(AnalysisError, match="membership"):
            monte_carlo_hits([None], 5, 10, seed=0, membership="exact")

    def test_fractions_grow_with_tier(self):
        """Test that nested tiers give non-decreasing fractions ending at 1."""
        reports = hull_volume_fractions(_random_tiered_table(4), samples=20_000, seed=1, chunk_size=5_000)
        assert [report.tier for report in reports] == list(Tier)
        assert [report.points for report in reports] == [8, 16, 24, 32, 40]
        fractions = [report.volume_fraction for report in reports]
        assert fractions == sorted(fractions)
        assert fractions[-1] == 1.0
        hits = [report.hits for report in reports]
        assert hits == sorted(hits)

    def test_standard_error(self):
        reports = hull_volume_fractions(_random_tiered_table(4), samples=20_000, seed=1)
        total = reports[-1].hits
        for report in reports:
            f = report.volume_fraction
            assert report.std_error == pytest.approx(np.sqrt(f * (1 - f) / total))

    def test_seeded_and_independent_of_jobs(self):
        """Test that a seed fixes the estimate whatever the worker count."""
        table = _random_tiered_table(8)
        serial = hull_volume_fractions(table, samples=12_000, seed=7, chunk_size=3_000, jobs=1)
        parallel = hull_volume_fractions(table, samples=12_000, seed=7, chunk_size=3_000, jobs=2)
        assert serial == parallel
        other = hull_volume_fractions(table, samples=12_000, seed=8, chunk_size=3_000)
        assert [r.hits for r in other] != [r.hits for r in serial]

    def test_empty_tier(self):
        """Test that a tier without any design points is an error."""
        table = _random_tiered_table(4)
        table = table[table["tier"] != "A"]
        with pytest.raises(AnalysisError, match="Tier A has no design points"):
            hull_volume_fractions(table, samples=5_000, seed=1)

    def test_sparse_lower_tier_has_no_volume(self):
        """Test that a tier with fewer points than a 5D hull needs reports zero volume."""
        table = _random_tiered_table(4)
        table = table.drop(table.index[table["tier"].eq("A").to_numpy()][3:])
        reports = hull_volume_fractions(table, samples=5_000, seed=1)
        assert reports[0].points == 3
        assert reports[0].volume_fraction == 0.0
        assert reports[0].hits == 0

    def test_degenerate_design_space(self):
        """Test that a tier E hull without volume is an error."""
        table = _random_tiered_table(4).iloc[:3]
        with pytest.raises(AnalysisError, match="degenerate"):
            hull_volume_fractions(table, samples=1_000, seed=1)

    def test_empty_table(self):
        with pytest.raises(AnalysisError):
            hull_volume_fractions(_random_tiered_table(4).iloc[:0], samples=1_000, seed=1)


class TestProjection:
    """Test suite for two-metric projections."""

    def test_columns(self, table):
        view = project(table, "bandwidth_gbs", "epb_closed", "capacity_gb")
        assert list(view.columns) == ["config_id", "bandwidth_gbs", "epb_closed", "capacity_gb", "tier"]
        assert len(view) == len(table)

    def test_same_metric_twice(self, table):
        with pytest.raises(AnalysisError):
            project(table, "bandwidth_gbs", "bandwidth_gbs")

    def test_unknown_metric(self, table):
        with pytest.raises(UnknownMetricError):
            project(table, "bandwidth_gbs", "edp")

    def test_all_pairs(self):
        """Test that five metrics give ten distinct pairs."""
        pairs = metric_pairs()
        assert len(pairs) == 10
        assert len(set(pairs)) == 10
        assert all(x != y for x, y in pairs)


class TestIsoConstraints:
    """Test suite for iso-constraint filtering against the baseline."""

    def test_survivors(self, table, baseline_row):
        """Test that survivors meet every bound relative to the baseline."""
        survivors = iso_filter(table, baseline_row, SERVER_GPU)
        assert survivors["config_id"].tolist() == ["base", "b1", "d1"]

    def test_baseline_always_survives(self, table, baseline_row):
        strict = [Constraint(metric="epb_closed", relation="<="), Constraint(metric="total_area_mm2", relation="<=")]
        assert "base" in iso_filter(table, baseline_row, strict)["config_id"].tolist()

    def test_baseline_violating_constraint(self, table, baseline_row):
        with pytest.raises(AnalysisError, match="Baseline violates"):
            iso_filter(table, baseline_row, [Constraint(metric="bandwidth_gbs", relation=">=", ratio=2.0)])

    def test_unknown_metric(self, table, baseline_row):
        with pytest.raises(UnknownMetricError):
            iso_filter(table, baseline_row, [Constraint(metric="edp", relation="<=")])

    def test_missing_baseline(self, table):
        with pytest.raises(AnalysisError, match="not a row"):
            find_baseline_row(table, "nope")

    def test_best_survivors(self, table, baseline_row):
        """Test that the best survivor per metric and its ratio to the baseline are reported."""
        survivors = iso_filter(table, baseline_row, SERVER_GPU)
        best = best_survivors(survivors, baseline_row, ["bandwidth_gbs", "power_w", "capacity_gb"])
        assert best["bandwidth_gbs"]["config_id"] == "d1"
        assert best["bandwidth_gbs"]["ratio"] == pytest.approx(2.0)
        assert best["power_w"]["value"] == pytest.approx(22.0)
        assert best["capacity_gb"]["ratio"] == pytest.approx(1.5)

    def test_best_of_nothing(self, table, baseline_row):
        assert best_survivors(table.iloc[:0], baseline_row, ["bandwidth_gbs"]) == {}

    def test_tier_ranges(self, table, baseline_row):
        """Test that per-tier ranges are ratios to the baseline."""
        ranges = tier_ranges(table, baseline_row).set_index(["tier", "metric"])
        assert ranges.loc[("A", "bandwidth_gbs"), "max_ratio"] == pytest.approx(1.0)
        assert ranges.loc[("E", "bandwidth_gbs"), "best_ratio"] == pytest.approx(3.0)
        assert ranges.loc[("E", "epb_closed"), "best_ratio"] == pytest.approx(0.5)
        assert ranges.loc[("C", "capacity_gb"), "min_ratio"] == pytest.approx(0.5)


class TestScenarios:
    """Test suite for application scenario presets."""

    def test_registry(self):
        assert set(SCENARIOS) == {"server_cpu", "server_gpu", "edge", "embedded_iot"}
        assert get_scenario("server_gpu").y == "epb_closed"

    def test_unknown_scenario(self):
        with pytest.raises(AnalysisError, match="Valid options"):
            get_scenario("mainframe")

    def test_capacity_floor(self, table):
        """Test that designs below the scenario capacity floor are dropped before the front."""
        fronts = scenario_fronts(table, get_scenario("server_gpu"))
        ids = {tier.value: front["config_id"].tolist() for tier, front in fronts.items()}
        # c1 has only 8 GB
        assert ids == {"A": ["base"], "B": ["b1"], "C": ["b1"], "D": ["b1", "d1"], "E": ["e1"]}
        assert list(fronts[Tier.E].columns) == ["config_id", "bandwidth_gbs", "epb_closed", "capacity_gb", "tier"]

    def test_without_capacity_floor(self, table):
        fronts = scenario_fronts(table, get_scenario("server_gpu"), capacity_filter=False)
        assert fronts[Tier.C]["config_id"].tolist() == ["c1"]
