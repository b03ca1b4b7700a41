"""
==========================================================
                  DESIGN-SPACE ANALYSIS
==========================================================

  Post-processing of a metrics table:

  - Pareto fronts, optionally per tier (tiers nest: the
    points of tier k are every row with tier <= k)
  - Monte Carlo volume of each tier's convex hull in the
    normalized 5-metric space, relative to tier E
  - 2D projections of the metric space
  - Iso-constraint filters relative to a baseline row
  - Application scenarios and per-tier metric ranges

==========================================================
"""

import itertools
import logging
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from app.config.settings import settings
from app.core.exceptions import AnalysisError, UnknownMetricError
from app.models.enums import Direction, Tier
from app.models.results import HullReport
from app.schemas.analysis import Constraint, Scenario

logger = logging.getLogger(__name__)

METRIC_DIRECTIONS: Dict[str, Direction] = {
    "bandwidth_gbs": Direction.MAXIMIZE,
    "capacity_gb": Direction.MAXIMIZE,
    "epb_closed": Direction.MINIMIZE,
    "epb_full": Direction.MINIMIZE,
    "miss_latency_ns": Direction.MINIMIZE,
    "total_area_mm2": Direction.MINIMIZE,
    "die_area_mm2": Direction.MINIMIZE,
    "power_w": Direction.MINIMIZE,
    "edp": Direction.MINIMIZE,
    "capacity_per_area": Direction.MAXIMIZE,
    "core_frequency_mhz": Direction.MAXIMIZE,
}

# the five axes of the design space
HULL_METRICS: List[str] = ["bandwidth_gbs", "capacity_gb", "epb_closed", "miss_latency_ns", "total_area_mm2"]

SCENARIOS: Dict[str, Scenario] = {
    scenario.name: scenario
    for scenario in (
        Scenario(
            name="server_cpu",
            description="Latency-sensitive servers: bandwidth and latency, cost-aware density",
            x="bandwidth_gbs",
            y="miss_latency_ns",
            color="capacity_per_area",
            min_capacity_gb=16.0,
        ),
        Scenario(
            name="server_gpu",
            description="Throughput machines in a power envelope: bandwidth and energy, enough capacity",
            x="bandwidth_gbs",
            y="epb_closed",
            color="capacity_gb",
            min_capacity_gb=16.0,
        ),
        Scenario(
            name="edge",
            description="Real-time edge under tight power: bandwidth and EDP, area-bound",
            x="bandwidth_gbs",
            y="edp",
            color="total_area_mm2",
            min_capacity_gb=4.0,
        ),
        Scenario(
            name="embedded_iot",
            description="Energy and area first, then latency",
            x="epb_closed",
            y="total_area_mm2",
            color="miss_latency_ns",
            min_capacity_gb=1.0,
        ),
    )
}

ObjectiveSpec = Union[str, Tuple[str, Direction]]

# slack for points on a hull facet
_FACET_TOLERANCE = 1e-9


def check_metric(name: str, table: Optional[pd.DataFrame] = None) -> str:
    """
    Raises:
        UnknownMetricError: the name is neither a known metric nor a table column.
    """
    if name in METRIC_DIRECTIONS:
        return name
    if table is not None and name in table.columns:
        return name
    known = sorted(set(METRIC_DIRECTIONS) | (set(table.columns) if table is not None else set()))
    raise UnknownMetricError(name, known)


def _objectives(objectives: Sequence[ObjectiveSpec], table: pd.DataFrame) -> List[Tuple[str, Direction]]:
    resolved = []
    for objective in objectives:
        if isinstance(objective, str):
            name = check_metric(objective, table)
            direction = METRIC_DIRECTIONS.get(name, Direction.MINIMIZE)
        else:
            name, direction = objective
            check_metric(name, table)
        if name not in table.columns:
            raise UnknownMetricError(name, sorted(table.columns))
        resolved.append((name, Direction(direction)))
    return resolved


def minimization_matrix(table: pd.DataFrame, objectives: Sequence[ObjectiveSpec]) -> np.ndarray:
    """Objective values with maximized columns negated, so smaller is always better."""
    columns = []
    for name, direction in _objectives(objectives, table):
        values = table[name].to_numpy(dtype=float)
        columns.append(-values if direction == Direction.MAXIMIZE else values)
    return np.column_stack(columns)


def flag_pareto_front(points: np.ndarray, keep_equal: bool = True) -> np.ndarray:
    """
    Boolean mask of non-dominated rows, all objectives minimized. Equal points
    are all kept when `keep_equal`.
    """
    n_points = points.shape[0]
    pareto = np.ones(n_points, dtype=bool)
    for i in range(n_points):
        if pareto[i]:
            # clear the points dominated by points[i]
            if keep_equal:
                pareto[pareto] = np.any(points[pareto] < points[i], axis=1) | np.all(
                    points[pareto] == points[i], axis=1
                )
            else:
                pareto[pareto] = np.any(points[pareto] < points[i], axis=1)
                pareto[i] = True
    return pareto


def pareto_front(table: pd.DataFrame, objectives: Sequence[ObjectiveSpec]) -> pd.DataFrame:
    """
    Rows not dominated on every objective at once, in table order.

    Raises:
        AnalysisError: empty table or fewer than two objectives.
        UnknownMetricError: an objective is not a known metric.
    """
    if len(objectives) < 2:
        raise AnalysisError("A Pareto front needs at least two objectives")
    if table.empty:
        raise AnalysisError("Cannot take the Pareto front of an empty table")
    mask = flag_pareto_front(minimization_matrix(table, objectives))
    return table[mask]


def tier_subset(table: pd.DataFrame, tier: Tier) -> pd.DataFrame:
    """Every row available to `tier` (tiers nest)."""
    ranks = table["tier"].map(lambda value: Tier(value).rank)
    return table[ranks <= tier.rank]


def pareto_per_tier(table: pd.DataFrame, objectives: Sequence[ObjectiveSpec]) -> Dict[Tier, pd.DataFrame]:
    fronts = {}
    for tier in Tier:
        subset = tier_subset(table, tier)
        if subset.empty:
            logger.warning(f"Tier {tier.value} has no rows; skipping its front")
            continue
        fronts[tier] = pareto_front(subset, objectives)
    return fronts


def normalize(table: pd.DataFrame, metrics: Sequence[str] = HULL_METRICS) -> np.ndarray:
    """Each metric mapped to [0, 1] over the whole table; constant columns map to 0."""
    for name in metrics:
        if name not in table.columns:
            raise UnknownMetricError(name, sorted(table.columns))
    values = table[list(metrics)].to_numpy(dtype=float)
    low = values.min(axis=0)
    span = values.max(axis=0) - low
    span[span == 0] = 1.0
    return (values - low) / span


def hull_equations(points: np.ndarray) -> Optional[np.ndarray]:
    """
    Facet equations [normal | offset] of the hull, or None when the points span
    less than the full dimension.
    """
    dim = points.shape[1]
    if points.shape[0] < dim + 1:
        return None
    if np.linalg.matrix_rank(points[1:] - points[0]) < dim:
        return None
    try:
        return ConvexHull(points).equations
    except QhullError as e:
        logger.warning(f"Qhull rejected {points.shape[0]} points: {e}")
        return None


def inside_hull(equations: np.ndarray, samples: np.ndarray) -> np.ndarray:
    """Mask of samples on the inner side of every facet."""
    return np.all(samples @ equations[:, :-1].T + equations[:, -1] <= _FACET_TOLERANCE, axis=1)


def in_hull_lp(points: np.ndarray, sample: np.ndarray) -> bool:
    """Membership as feasibility of a convex combination: lambda >= 0, sum 1, P^T lambda = x."""
    n = points.shape[0]
    a_eq = np.vstack([points.T, np.ones((1, n))])
    b_eq = np.append(sample, 1.0)
    result = linprog(np.zeros(n), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return result.status == 0


def _sample_counts(total: int, chunk_size: int) -> List[int]:
    full, rest = divmod(total, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def _count_hits(task: Tuple[List[Optional[np.ndarray]], str, np.random.SeedSequence, int, int]) -> np.ndarray:
    """
    Hits per hull for one chunk of uniform samples in the unit cube. Each hull
    is given by its facet equations, or by its points when `membership` is "lp".
    """
    hulls, membership, seed, count, dim = task
    rng = np.random.default_rng(seed)
    samples = rng.random((count, dim))
    hits = np.zeros(len(hulls), dtype=np.int64)
    covered = np.zeros(count, dtype=bool)
    for k, hull in enumerate(hulls):
        if hull is not None:
            if membership == "lp":
                pending = np.flatnonzero(~covered)
                covered[pending] = [in_hull_lp(hull, samples[i]) for i in pending]
            else:
                covered |= inside_hull(hull, samples)
        # a sample inside a smaller nested hull counts for every larger one
        hits[k] = int(covered.sum())
    return hits


def monte_carlo_hits(
    hulls: List[Optional[np.ndarray]],
    dim: int,
    samples: int,
    seed: int,
    chunk_size: Optional[int] = None,
    jobs: int = 1,
    membership: str = "facets",
) -> np.ndarray:
    """
    Cumulative hit counts for a list of nested hulls. Chunk k always draws from
    the k-th spawned seed, so the result does not depend on `jobs`.
    """
    if membership not in ("facets", "lp"):
        raise AnalysisError(f"Unknown hull membership test '{membership}'. Valid options: facets, lp.")
    counts = _sample_counts(samples, chunk_size or settings.HULL_CHUNK_SIZE)
    seeds = np.random.SeedSequence(seed).spawn(len(counts))
    tasks = [(hulls, membership, child, count, dim) for child, count in zip(seeds, counts)]
    if jobs > 1 and len(tasks) > 1:
        with Pool(processes=jobs) as pool:
            results = pool.map(_count_hits, tasks)
    else:
        results = [_count_hits(task) for task in tasks]
    return np.sum(results, axis=0) if results else np.zeros(len(hulls), dtype=np.int64)


def _hull_model(points: np.ndarray, membership: str) -> Optional[np.ndarray]:
    equations = hull_equations(points) if len(points) else None
    if equations is None:
        return None
    return points if membership == "lp" else equations


def estimate_hull_fraction(
    points: np.ndarray,
    samples: int,
    seed: int,
    chunk_size: Optional[int] = None,
    membership: str = "facets",
) -> Tuple[float, float]:
    """
    (fraction of the unit cube inside the hull of `points`, standard error).
    `membership="lp"` tests each sample with a linear program instead of
    the facet equations; it is slow and meant for small cross-checks.
    """
    hull = _hull_model(points, membership)
    if hull is None:
        return 0.0, 0.0
    hits = int(monte_carlo_hits([hull], points.shape[1], samples, seed, chunk_size, membership=membership)[0])
    fraction = hits / samples
    return fraction, float(np.sqrt(fraction * (1.0 - fraction) / samples))


def hull_volume_fractions(
    table: pd.DataFrame,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    metrics: Sequence[str] = HULL_METRICS,
    chunk_size: Optional[int] = None,
    jobs: int = 1,
    membership: str = "facets",
) -> List[HullReport]:
    """
    Volume of each tier's hull as a fraction of tier E's, estimated by uniform
    sampling of the normalized metric cube.

    A tier with a handful of points spans no volume and reports 0; a tier with no
    points at all is an error.

    Raises:
        AnalysisError: empty table, a tier without points, or tier E's hull has
            no volume.
    """
    samples = samples or settings.HULL_SAMPLES
    seed = settings.HULL_SEED if seed is None else seed
    if table.empty:
        raise AnalysisError("Cannot take hull volumes of an empty table")
    normalized = normalize(table, metrics)
    ranks = table["tier"].map(lambda value: Tier(value).rank).to_numpy()

    tiers = list(Tier)
    hulls: List[Optional[np.ndarray]] = []
    point_counts: List[int] = []
    for tier in tiers:
        points = normalized[ranks <= tier.rank]
        if len(points) == 0:
            raise AnalysisError(f"Tier {tier.value} has no design points; the table does not cover every tier")
        point_counts.append(len(points))
        hulls.append(_hull_model(points, membership))
    if hulls[-1] is None:
        raise AnalysisError("Tier E hull is degenerate; the table spans fewer than 5 independent metrics")

    hits = monte_carlo_hits(hulls, normalized.shape[1], samples, seed, chunk_size, jobs, membership)
    total = int(hits[-1])
    if total == 0:
        raise AnalysisError(f"No sample of {samples} fell inside the tier E hull; raise the sample count")

    reports = []
    for tier, count, tier_hits in zip(tiers, point_counts, hits):
        fraction = 1.0 if tier == Tier.E else float(tier_hits) / total
        reports.append(
            HullReport(
                tier=tier,
                points=count,
                volume_fraction=fraction,
                sample_count=samples,
                hits=int(tier_hits),
                std_error=float(np.sqrt(fraction * (1.0 - fraction) / total)),
            )
        )
        logger.debug(f"Tier {tier.value}: {count} points, {tier_hits} hits, fraction {fraction:.6g}")
    return reports


def metric_pairs(metrics: Sequence[str] = HULL_METRICS) -> List[Tuple[str, str]]:
    return list(itertools.combinations(metrics, 2))


def project(
    table: pd.DataFrame, metric_x: str, metric_y: str, color_metric: Optional[str] = None
) -> pd.DataFrame:
    """
    Two-metric view of the table with the tier (and an optional colour column).

    Raises:
        AnalysisError: x and y name the same metric.
        UnknownMetricError: a name is not a table column.
    """
    if metric_x == metric_y:
        raise AnalysisError(f"Projection needs two different metrics, got '{metric_x}' twice")
    columns = [metric_x, metric_y] + ([color_metric] if color_metric else [])
    for name in columns:
        if name not in table.columns:
            raise UnknownMetricError(name, sorted(table.columns))
    keep = ["config_id"] if "config_id" in table.columns else []
    return table[keep + columns + ["tier"]].copy()


def find_baseline_row(table: pd.DataFrame, baseline_id: str) -> pd.Series:
    matches = table[table["config_id"] == baseline_id]
    if matches.empty:
        raise AnalysisError(f"Baseline {baseline_id} is not a row of the table")
    return matches.iloc[0]


def _satisfies(values: pd.Series, constraint: Constraint, baseline_value: float) -> pd.Series:
    bound = constraint.bound(baseline_value)
    scale = max(abs(bound), 1.0)
    # relative slack so the baseline row always meets "no worse than itself"
    slack = 1e-9 * scale
    if constraint.relation == ">=":
        return values >= bound - slack
    return values <= bound + slack


def iso_filter(table: pd.DataFrame, baseline_row: pd.Series, constraints: Sequence[Constraint]) -> pd.DataFrame:
    """
    Rows meeting every constraint relative to the baseline row.

    Raises:
        UnknownMetricError: a constraint names an unknown column.
        AnalysisError: the baseline itself violates a constraint.
    """
    mask = pd.Series(True, index=table.index)
    for constraint in constraints:
        if constraint.metric not in table.columns:
            raise UnknownMetricError(constraint.metric, sorted(table.columns))
        base_value = float(baseline_row[constraint.metric])
        baseline_ok = _satisfies(pd.Series([base_value]), constraint, base_value).iloc[0]
        if not baseline_ok:
            raise AnalysisError(f"Baseline violates its own constraint '{constraint.label()}'")
        mask &= _satisfies(table[constraint.metric], constraint, base_value)
    return table[mask]


def best_survivors(
    survivors: pd.DataFrame, baseline_row: pd.Series, metrics: Sequence[str]
) -> Dict[str, Dict[str, object]]:
    """Per metric: the best surviving row, its value and its ratio to the baseline."""
    best = {}
    for name in metrics:
        check_metric(name, survivors)
        if survivors.empty:
            continue
        direction = METRIC_DIRECTIONS.get(name, Direction.MINIMIZE)
        column = survivors[name]
        index = column.idxmax() if direction == Direction.MAXIMIZE else column.idxmin()
        value = float(column.loc[index])
        base = float(baseline_row[name])
        best[name] = {
            "config_id": survivors.loc[index, "config_id"],
            "value": value,
            "ratio": value / base if base else float("nan"),
        }
    return best


def tier_ranges(
    table: pd.DataFrame, baseline_row: pd.Series, metrics: Sequence[str] = HULL_METRICS
) -> pd.DataFrame:
    """Min and max of each metric per tier, relative to the baseline, with the favourable extreme."""
    records = []
    for tier in Tier:
        subset = tier_subset(table, tier)
        if subset.empty:
            continue
        for name in metrics:
            base = float(baseline_row[name])
            low, high = float(subset[name].min()), float(subset[name].max())
            direction = METRIC_DIRECTIONS.get(name, Direction.MINIMIZE)
            records.append(
                {
                    "tier": tier.value,
                    "metric": name,
                    "min_ratio": low / base if base else float("nan"),
                    "max_ratio": high / base if base else float("nan"),
                    "best_ratio": (high if direction == Direction.MAXIMIZE else low) / base if base else float("nan"),
                }
            )
    return pd.DataFrame.from_records(records)


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise AnalysisError(f"Unknown scenario '{name}'. Valid options: {', '.join(sorted(SCENARIOS))}.")


def scenario_fronts(table: pd.DataFrame, scenario: Scenario, capacity_filter: bool = True) -> Dict[Tier, pd.DataFrame]:
    """Per-tier fronts of the scenario's primary pair, optionally capacity-filtered."""
    if capacity_filter and scenario.min_capacity_gb is not None:
        table = table[table["capacity_gb"] >= scenario.min_capacity_gb]
    fronts = pareto_per_tier(table, [scenario.x, scenario.y])
    columns = ["config_id", scenario.x, scenario.y, scenario.color, "tier"]
    return {tier: front[[c for c in columns if c in front.columns]] for tier, front in fronts.items()}
