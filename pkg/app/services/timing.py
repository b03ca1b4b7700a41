# app/services/timing.py

"""
Timing parameters of a design, scaled from the node's reference timings.

Every term is the reference value times a geometry ratio. The ratios are taken
against a `TimingBasis` built from the reference configuration on the same node,
so the reference design reproduces its own timings exactly. Wire delay is linear
in length (repeated wires).
"""

import logging
from typing import Tuple

from app.models.enums import WireClass
from app.models.results import BitlineLoad, DieFloorplan, MatRoutingPlan, TimingBasis, TimingResult
from app.schemas.config import MemoryConfig
from app.schemas.technode import TechnologyNode

logger = logging.getLogger(__name__)

# Ohm * fF -> ns
_RC_TO_NS = 1e-6


def bitline_load(config: MemoryConfig, node: TechnologyNode, sensing: bool = False) -> BitlineLoad:
    """Bitline load; an offset-cancellation BLSA hides C_BLSA while sensing."""
    hide_blsa = sensing and config.subarray.ocsa_enabled
    return BitlineLoad(
        c_cell=node.c_cell,
        n_wl=config.mat.wls_per_mat,
        c_bl_per_wl=node.c_bl_per_wl,
        c_blsa_effective=0.0 if hide_blsa else node.c_blsa,
    )


def latency_path(config: MemoryConfig, node: TechnologyNode, floorplan: DieFloorplan) -> float:
    """Worst-case read path: up the TSVs to the top die, across it and back (ns)."""
    tsv = 2.0 * config.dies * node.r_tsv * node.c_tsv * _RC_TO_NS
    die = 2.0 * floorplan.die_len_y * node.die_traverse_time_per_mm
    return tsv + die


def _cap(plan: MatRoutingPlan, *classes: WireClass) -> float:
    for wire_class in classes:
        run = plan.find(wire_class)
        if run is not None:
            return run.total_cap
    return 0.0


def timing_basis(
    config: MemoryConfig, node: TechnologyNode, floorplan: DieFloorplan, plan: MatRoutingPlan
) -> TimingBasis:
    """Geometry terms of a design. `plan` must carry wire lengths."""
    return TimingBasis(
        bank_width=floorplan.bank_width,
        sense_load=bitline_load(config, node, sensing=True).total,
        restore_load=bitline_load(config, node).total,
        latency_path=latency_path(config, node, floorplan),
        csl_cap=_cap(plan, WireClass.CSL),
        ldl_cap=_cap(plan, WireClass.LDL, WireClass.LSL),
        mdl_cap=_cap(plan, WireClass.MDL),
    )


def _row_term(reference_time: float, signal_fraction: float, width_ratio: float, load_ratio: float) -> float:
    return reference_time * (signal_fraction * width_ratio + (1.0 - signal_fraction) * load_ratio)


def row_timing(
    config: MemoryConfig, node: TechnologyNode, floorplan: DieFloorplan, reference: TimingBasis
) -> Tuple[float, float]:
    """
    (tRCD, tRP) in ns. The signal share follows the bank width (farthest BLSA),
    the bitline share follows the bitline load.
    """
    ref = node.timing
    width_ratio = floorplan.bank_width / reference.bank_width
    sense_ratio = bitline_load(config, node, sensing=True).total / reference.sense_load
    restore_ratio = bitline_load(config, node).total / reference.restore_load
    tRCD = _row_term(ref.tRCD, ref.row_signal_fraction, width_ratio, sense_ratio)
    tRP = _row_term(ref.tRP, ref.row_signal_fraction, width_ratio, restore_ratio)
    return max(tRCD, ref.blsa_sense_time), tRP


def read_latency(
    config: MemoryConfig, node: TechnologyNode, floorplan: DieFloorplan, reference: TimingBasis
) -> float:
    return node.timing.tCL * latency_path(config, node, floorplan) / reference.latency_path


def bank_cycle_time(plan: MatRoutingPlan, node: TechnologyNode, reference: TimingBasis) -> float:
    """
    t_DRV + t_CSL + t_LDL + t_MDL + t_MDL,PRE, each wire term scaled by its
    capacitance ratio. Under DLOMAT the LSL takes the LDL term.
    """
    ref = node.timing
    csl = ref.t_csl * _cap(plan, WireClass.CSL) / reference.csl_cap
    ldl = ref.t_ldl * _cap(plan, WireClass.LDL, WireClass.LSL) / reference.ldl_cap
    mdl = ref.t_mdl * (1.0 + ref.mdl_precharge_ratio) * _cap(plan, WireClass.MDL) / reference.mdl_cap
    return ref.t_drv + csl + ldl + mdl


def column_timing(bank_cycle: float, pumps: int, adl: bool) -> Tuple[float, float]:
    """
    (tCCDL, tCCDS) in ns.

    Raises:
        ValueError: pumps < 1.
    """
    if pumps < 1:
        raise ValueError(f"pumps must be >= 1, got {pumps}")
    tCCDL = bank_cycle * pumps
    return tCCDL, tCCDL / 2.0 if adl else tCCDL


def compute_timing(
    config: MemoryConfig,
    node: TechnologyNode,
    floorplan: DieFloorplan,
    plan: MatRoutingPlan,
    reference: TimingBasis,
) -> TimingResult:
    tRCD, tRP = row_timing(config, node, floorplan, reference)
    tCL = read_latency(config, node, floorplan, reference)
    cycle = bank_cycle_time(plan, node, reference)
    tCCDL, tCCDS = column_timing(cycle, config.pumps_per_atom, config.inter_bank.adl_enabled)
    return TimingResult(
        tRP=tRP,
        tRCD=tRCD,
        tCL=tCL,
        bank_cycle=cycle,
        tCCDL=tCCDL,
        tCCDS=tCCDS,
        miss_latency=tRP + tRCD + tCL,
        core_frequency=1000.0 / cycle,
    )
