"""
==========================================================
                 DESIGN EVALUATOR SERVICE
==========================================================

  Composes routing, floorplan, timing, energy, capacity
  and bandwidth into one metrics record per design.

  The node's timing reference design is evaluated once
  per evaluator and cached; every timing ratio of every
  later design is taken against it.

==========================================================
"""

import logging
from typing import Any, Dict, Optional, Tuple

from app.models.enums import Tier
from app.models.results import DesignMetrics, DesignReport, TimingBasis
from app.schemas.config import MemoryConfig
from app.schemas.technode import TechnologyNode
from app.services.capacity_bandwidth import bandwidth, capacity, datapath_stages
from app.services.config_service import config_id, flatten_config, load_config
from app.services.energy import access_energy, power
from app.services.floorplan import die_floorplan
from app.services.routing import global_datapath, plan_mat_routing, plan_with_lengths
from app.services.timing import compute_timing, timing_basis

logger = logging.getLogger(__name__)


def tier_of_field(dotted: str) -> Tier:
    """Lowest tier whose parameter set contains the dotted config field."""
    if dotted == "mat.dlomat_enabled":
        return Tier.E
    if dotted.startswith("mat."):
        return Tier.D
    if dotted.startswith("subarray."):
        return Tier.C
    if dotted.startswith("bank."):
        return Tier.B
    return Tier.A


def changed_fields(config: MemoryConfig, baseline: MemoryConfig) -> Dict[str, Tuple[Any, Any]]:
    flat = flatten_config(config)
    base = flatten_config(baseline)
    return {key: (base.get(key), value) for key, value in flat.items() if base.get(key) != value}


def classify_tier(config: MemoryConfig, baseline: MemoryConfig) -> Tier:
    """Smallest tier covering every field where `config` departs from `baseline`."""
    tier = Tier.A
    for dotted in changed_fields(config, baseline):
        candidate = tier_of_field(dotted)
        if candidate.rank > tier.rank:
            tier = candidate
    return tier


class DesignEvaluator:
    """
    Evaluates designs on one technology node.

    Args:
        node: The (already scaled) node.
        reference: Timing reference design; defaults to the config the node's
            timing block names.
        baseline: Design the tier is measured against; defaults to the reference.
    """

    def __init__(
        self,
        node: TechnologyNode,
        reference: Optional[MemoryConfig] = None,
        baseline: Optional[MemoryConfig] = None,
    ):
        self.node = node
        self._reference = reference
        self._baseline = baseline
        self._basis: Optional[TimingBasis] = None

    @property
    def reference(self) -> MemoryConfig:
        if self._reference is None:
            self._reference = load_config(self.node.timing.reference_config)
        return self._reference

    @property
    def baseline(self) -> MemoryConfig:
        return self._baseline if self._baseline is not None else self.reference

    @property
    def basis(self) -> TimingBasis:
        if self._basis is None:
            ref = self.reference
            floorplan = die_floorplan(ref, self.node, plan_mat_routing(ref, self.node))
            plan = plan_with_lengths(ref, self.node, floorplan)
            self._basis = timing_basis(ref, self.node, floorplan, plan)
            logger.debug(f"Timing basis from '{ref.name or config_id(ref)}' on {self.node.name}")
        return self._basis

    def report(self, config: MemoryConfig) -> DesignReport:
        """
        Full evaluation of one design.

        Raises:
            RoutingInfeasibleError: the MAT cannot be routed.
        """
        node = self.node
        floorplan = die_floorplan(config, node, plan_mat_routing(config, node))
        plan = plan_with_lengths(config, node, floorplan)
        runs = global_datapath(config, floorplan, node)
        timing = compute_timing(config, node, floorplan, plan, self.basis)
        energy = access_energy(config, node, floorplan, plan, runs)
        stages = datapath_stages(config, timing, node)
        bw = bandwidth(config, timing, node)
        cap = capacity(config)
        total = floorplan.die_area * config.dies

        metrics = DesignMetrics(
            config_id=config_id(config),
            tier=classify_tier(config, self.baseline),
            bandwidth_gbs=bw,
            capacity_gb=cap,
            epb_full=energy.full_row_epb,
            epb_closed=energy.closed_row_epb,
            miss_latency_ns=timing.miss_latency,
            die_area_mm2=floorplan.die_area,
            total_area_mm2=total,
            power_w=power(bw, energy.closed_row_epb),
            edp=energy.closed_row_epb * timing.miss_latency,
            capacity_per_area=cap / total,
            core_frequency_mhz=timing.core_frequency,
            pumps=config.pumps_per_atom,
            dies=config.dies,
            die_len_x_mm=floorplan.die_len_x,
            die_len_y_mm=floorplan.die_len_y,
            tRP=timing.tRP,
            tRCD=timing.tRCD,
            tCL=timing.tCL,
            tCCDL=timing.tCCDL,
            tCCDS=timing.tCCDS,
            name=config.name,
        )
        return DesignReport(
            metrics=metrics,
            floorplan=floorplan,
            routing=plan,
            datapath_runs=runs,
            stages=stages,
            timing=timing,
            energy=energy,
        )

    def evaluate(self, config: MemoryConfig) -> DesignMetrics:
        return self.report(config).metrics
