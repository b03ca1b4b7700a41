"""
==========================================================
                   SWEEP ENGINE SERVICE
==========================================================

  Evaluates every point of a SweepSpec and builds the
  metrics table.

  - Points are evaluated in chunks on a process pool;
    chunk results come back in submission order, so the
    table is identical for any worker count
  - Every Cartesian index ends up either as a row or as
    a skipped record with a reason:
        invalid | stack_height | routing_infeasible | die_size

==========================================================
"""

import logging
from dataclasses import asdict, dataclass, field
from itertools import islice
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Tuple, Union

import pandas as pd

from app.config.settings import settings
from app.core.exceptions import RoutingInfeasibleError
from app.models.results import SkippedDesign
from app.schemas.config import MemoryConfig, SweepFilters, SweepSpec
from app.schemas.technode import TechnologyNode
from app.services.config_service import (
    SweepCandidate,
    config_id,
    flatten_config,
    iter_sweep,
    load_config,
    sweep_size,
)
from app.services.evaluator import DesignEvaluator
from app.utils.table_io import metrics_frame, write_json, write_jsonl, write_table

logger = logging.getLogger(__name__)

Outcome = Tuple[int, Optional[Dict[str, Any]], Optional[SkippedDesign]]

# per-process evaluator, set by the pool initializer
_worker_evaluator: Optional[DesignEvaluator] = None
_worker_filters: Optional[SweepFilters] = None


@dataclass
class SweepCounts:
    cartesian: int = 0
    invalid: int = 0
    stack_height: int = 0
    routing_infeasible: int = 0
    die_size: int = 0
    emitted: int = 0

    @property
    def filtered(self) -> int:
        return self.invalid + self.stack_height + self.routing_infeasible + self.die_size

    def add(self, reason: str) -> None:
        setattr(self, reason, getattr(self, reason) + 1)

    def to_dict(self) -> Dict[str, int]:
        data = asdict(self)
        data["filtered"] = self.filtered
        return data


@dataclass
class SweepResult:
    table: pd.DataFrame
    counts: SweepCounts
    skipped: List[SkippedDesign] = field(default_factory=list)


def design_row(evaluator: DesignEvaluator, config: MemoryConfig) -> Dict[str, Any]:
    """Metrics followed by the flattened config."""
    row = evaluator.evaluate(config).to_dict()
    row.update(flatten_config(config))
    return row


def evaluate_point(
    evaluator: DesignEvaluator, index: int, config: MemoryConfig, filters: SweepFilters
) -> Outcome:
    try:
        row = design_row(evaluator, config)
    except RoutingInfeasibleError as e:
        return index, None, SkippedDesign(index, "routing_infeasible", str(e), config_id(config))
    if row["die_len_x_mm"] > filters.max_die_width_mm or row["die_len_y_mm"] > filters.max_die_len_mm:
        detail = (
            f"die {row['die_len_x_mm']:.2f} x {row['die_len_y_mm']:.2f} mm exceeds "
            f"{filters.max_die_width_mm:g} x {filters.max_die_len_mm:g} mm"
        )
        return index, None, SkippedDesign(index, "die_size", detail, row["config_id"])
    return index, row, None


def _init_worker(
    node: TechnologyNode, reference: MemoryConfig, baseline: MemoryConfig, filters: SweepFilters
) -> None:
    global _worker_evaluator, _worker_filters
    _worker_evaluator = DesignEvaluator(node, reference=reference, baseline=baseline)
    _worker_filters = filters


def evaluate_candidate(
    evaluator: DesignEvaluator, candidate: SweepCandidate, filters: SweepFilters
) -> Outcome:
    if candidate.config is None:
        return candidate.index, None, SkippedDesign(candidate.index, candidate.reason, candidate.detail or "")
    return evaluate_point(evaluator, candidate.index, candidate.config, filters)


def _evaluate_chunk(chunk: List[SweepCandidate]) -> List[Outcome]:
    return [evaluate_candidate(_worker_evaluator, candidate, _worker_filters) for candidate in chunk]


def _chunks(items: Iterable[SweepCandidate], size: int) -> Iterator[List[SweepCandidate]]:
    iterator = iter(items)
    while True:
        chunk = list(islice(iterator, size))
        if not chunk:
            return
        yield chunk


def run_sweep(
    spec: SweepSpec,
    node: TechnologyNode,
    jobs: Optional[int] = None,
    chunk_size: Optional[int] = None,
    baseline: Optional[MemoryConfig] = None,
    progress: Optional[Callable[[int], None]] = None,
) -> SweepResult:
    """
    Evaluates the whole sweep.

    Args:
        jobs: Worker processes; 1 evaluates in-process. Defaults to settings.SWEEP_JOBS.
        progress: Called with the number of Cartesian points just accounted for.
    """
    jobs = max(1, jobs or settings.SWEEP_JOBS)
    chunk_size = max(1, chunk_size or settings.SWEEP_CHUNK_SIZE)
    if baseline is None:
        baseline = load_config(spec.baseline)
    evaluator = DesignEvaluator(node, baseline=baseline)
    # a broken reference design fails here, before any worker starts
    evaluator.basis

    counts = SweepCounts(cartesian=sweep_size(spec))
    skipped: List[SkippedDesign] = []
    rows: List[Dict[str, Any]] = []

    def collect(outcomes: List[Outcome]) -> None:
        for _, row, skip in outcomes:
            if row is not None:
                rows.append(row)
                counts.emitted += 1
            else:
                counts.add(skip.reason)
                skipped.append(skip)
                logger.debug(f"Skipping point {skip.index}: {skip.reason} ({skip.detail})")
        if progress:
            progress(len(outcomes))

    logger.info(f"Sweep '{spec.name}': {counts.cartesian} points, {jobs} job(s)")
    if jobs == 1:
        for chunk in _chunks(iter_sweep(spec, baseline), chunk_size):
            collect([evaluate_candidate(evaluator, candidate, spec.filters) for candidate in chunk])
    else:
        initargs = (node, evaluator.reference, baseline, spec.filters)
        with Pool(processes=jobs, initializer=_init_worker, initargs=initargs) as pool:
            for outcomes in pool.imap(_evaluate_chunk, _chunks(iter_sweep(spec, baseline), chunk_size)):
                collect(outcomes)

    logger.info(
        f"Sweep '{spec.name}' done: {counts.emitted} emitted, {counts.filtered} skipped "
        f"(invalid {counts.invalid}, stack {counts.stack_height}, routing {counts.routing_infeasible}, "
        f"die {counts.die_size})"
    )
    return SweepResult(table=metrics_frame(rows), counts=counts, skipped=skipped)


def sidecar_paths(out: Union[str, Path]) -> Tuple[Path, Path]:
    """(skipped-designs JSON-lines, counts JSON) next to the table."""
    out = Path(out)
    return out.with_suffix(".skipped.jsonl"), out.with_suffix(".counts.json")


def write_sweep(result: SweepResult, out: Union[str, Path], jsonl: bool = False) -> List[Path]:
    out = Path(out)
    written = [write_table(result.table, out)]
    skipped_path, counts_path = sidecar_paths(out)
    written.append(write_jsonl((record.to_dict() for record in result.skipped), skipped_path))
    written.append(write_json(result.counts.to_dict(), counts_path))
    if jsonl:
        written.append(write_jsonl(result.table.to_dict(orient="records"), out.with_suffix(".jsonl")))
    return written
