# app/services/energy.py

"""
==========================================================
                 ENERGY AND POWER SERVICE
==========================================================

  Every access is a list of wire events, each costing

      E = 1/2 * alpha * n * (C_per_l * l) * dV * V_ext

  - ACT:       bitline sense on the page, WL, MWL, LWLsel
  - PRE:       WL, MWL, LWLsel reset
  - Column:    CSL, LDL (or LSL), MDL, once per pump
  - Datapath:  BGBUS, GBUS, TSV, DQ, once per atom

  Closed-row: one ACT + PRE per atom.
  Full-row:   one ACT + PRE per page.

==========================================================
"""

import logging
from typing import Dict, List, Optional

from app.models.enums import WireClass
from app.models.results import AccessEnergy, DieFloorplan, EnergyEvent, MatRoutingPlan, WireRun
from app.schemas.config import MemoryConfig
from app.schemas.technode import TechnologyNode
from app.services.timing import bitline_load

logger = logging.getLogger(__name__)


def event_energy(event: EnergyEvent) -> float:
    """Energy of one event in pJ."""
    return event.energy


def wire_event(
    name: str,
    wire_class: WireClass,
    n: float,
    length: float,
    node: TechnologyNode,
    cap_per_len: Optional[float] = None,
) -> EnergyEvent:
    tech = node.wire(wire_class)
    return EnergyEvent(
        name=name,
        alpha=tech.alpha,
        n=n,
        cap_per_len=tech.cap_per_len if cap_per_len is None else cap_per_len,
        length=length,
        dv_internal=tech.swing,
        v_external=node.v_external,
    )


def wordline_events(
    prefix: str, config: MemoryConfig, node: TechnologyNode, floorplan: DieFloorplan
) -> List[EnergyEvent]:
    mat = floorplan.mat
    section = config.active_mats * mat.width
    return [
        wire_event(f"{prefix}.WL", WireClass.WL, config.active_mats, mat.cell_array_width, node),
        wire_event(f"{prefix}.MWL", WireClass.MWL, 1, section, node),
        wire_event(f"{prefix}.LWLsel", WireClass.LWLSEL, 1, section, node),
    ]


def activate_events(config: MemoryConfig, node: TechnologyNode, floorplan: DieFloorplan) -> List[EnergyEvent]:
    length = floorplan.mat.cell_array_height
    load = bitline_load(config, node).total
    sense = wire_event("ACT.BL", WireClass.BL, config.page_bits, length, node, cap_per_len=load / length)
    return [sense] + wordline_events("ACT", config, node, floorplan)


def precharge_events(config: MemoryConfig, node: TechnologyNode, floorplan: DieFloorplan) -> List[EnergyEvent]:
    return wordline_events("PRE", config, node, floorplan)


def column_events(config: MemoryConfig, node: TechnologyNode, plan: MatRoutingPlan) -> List[EnergyEvent]:
    """One column cycle; `plan` must carry wire lengths."""
    events = []
    csl = plan.find(WireClass.CSL)
    if csl is not None:
        events.append(wire_event("COL.CSL", WireClass.CSL, config.active_mats, csl.length, node))
    for wire_class in (WireClass.LDL, WireClass.LSL, WireClass.MDL):
        run = plan.find(wire_class)
        if run is not None:
            events.append(
                wire_event(f"COL.{wire_class.value}", wire_class, config.mdl_bits_per_access, run.length, node)
            )
    return events


def datapath_events(config: MemoryConfig, node: TechnologyNode, runs: List[WireRun]) -> List[EnergyEvent]:
    """One atom crossing every global run."""
    return [
        wire_event(f"DP.{run.wire_class.value}", run.wire_class, config.atom_bits, run.length, node, run.cap_per_len)
        for run in runs
    ]


def _sum(events: List[EnergyEvent]) -> float:
    return sum(event_energy(event) for event in events)


def access_energy(
    config: MemoryConfig,
    node: TechnologyNode,
    floorplan: DieFloorplan,
    plan: MatRoutingPlan,
    datapath_runs: List[WireRun],
) -> AccessEnergy:
    act = activate_events(config, node, floorplan)
    pre = precharge_events(config, node, floorplan)
    col = column_events(config, node, plan)
    dp = datapath_events(config, node, datapath_runs)

    e_act, e_pre, e_col, e_dp = _sum(act), _sum(pre), _sum(col), _sum(dp)
    row = e_act + e_pre
    atom = config.atom_bits
    page = config.page_bits
    closed = (row + config.pumps_per_atom * e_col + e_dp) / atom
    full = (row + (page / config.mdl_bits_per_access) * e_col + (page / atom) * e_dp) / page

    breakdown: Dict[str, float] = {event.name: event_energy(event) for event in act + pre + col + dp}
    return AccessEnergy(
        act_energy=e_act,
        pre_energy=e_pre,
        column_energy=e_col,
        datapath_energy=e_dp,
        full_row_epb=full,
        closed_row_epb=closed,
        events=breakdown,
    )


def power(bandwidth_gbs: float, epb_pj: float) -> float:
    """
    Power in W of moving `bandwidth_gbs` GB/s at `epb_pj` pJ/b.

    Raises:
        ValueError: negative input.
    """
    if bandwidth_gbs < 0 or epb_pj < 0:
        raise ValueError(f"bandwidth and energy per bit must be non-negative, got {bandwidth_gbs}, {epb_pj}")
    return bandwidth_gbs * 8.0 * epb_pj / 1000.0
