"""
==========================================================
                  FLOORPLAN SERVICE MODULE
==========================================================

  Rolls geometry up from cell pitches to the die:

  MAT -> bank (MATs x physical subarrays + decoders)
      -> die (bank tiles around a horizontal TSV strip,
              bus routing, periphery)
      -> stack (die area x dies)

  MAT and bank values are in um, die values in mm.

==========================================================
"""

import logging
from typing import Optional, Tuple

from app.models.enums import SalpKind, WireClass
from app.models.results import DieFloorplan, MatGeometry, MatRoutingPlan
from app.schemas.config import MemoryConfig
from app.schemas.technode import TechnologyNode
from app.services.routing import bgbus_length, bgbus_width, bus_width, gbus_length, plan_mat_routing

logger = logging.getLogger(__name__)

UM2_PER_MM2 = 1e6


def resolve_overhead(transistor_area: float, routing_area: float) -> float:
    """
    Larger of the transistor and the routing requirement of a region.

    Raises:
        ValueError: either input is negative.
    """
    if transistor_area < 0 or routing_area < 0:
        raise ValueError(f"Overheads must be non-negative, got {transistor_area} and {routing_area}")
    return max(transistor_area, routing_area)


def mat_geometry(config: MemoryConfig, node: TechnologyNode, plan: Optional[MatRoutingPlan] = None) -> MatGeometry:
    if plan is None:
        plan = plan_mat_routing(config, node)
    regions = plan.regions
    mat = config.mat
    lwd_strip = resolve_overhead(regions.lwd_transistor, plan.lwd_demand)
    blsa_strip = resolve_overhead(regions.blsa_transistor, plan.blsa_demand)
    return MatGeometry(
        width=regions.cell_array_width * (1.0 + mat.bl_isolation_overhead) + lwd_strip,
        height=regions.cell_array_height * (1.0 + mat.wl_isolation_overhead) + blsa_strip,
        cell_array_width=regions.cell_array_width,
        cell_array_height=regions.cell_array_height,
        blsa_strip_height=blsa_strip,
        lwd_strip_width=lwd_strip,
    )


def bank_dimensions(config: MemoryConfig, node: TechnologyNode, mat: MatGeometry) -> Tuple[float, float]:
    """(width, height) of one bank in um."""
    width = config.bank.mats_per_subarray * mat.width + node.row_decoder_width
    if config.bank.salp_mode.kind != SalpKind.NONE:
        width += node.salp_latch_width
    height = config.physical_subarrays * mat.height + node.column_decoder_height
    return width, height


def bank_tiling(config: MemoryConfig) -> Tuple[int, int]:
    """
    (columns, rows) of the bank grid on one die. Channels split into two rows
    around the TSV strip when their count per die is even.
    """
    ib = config.inter_bank
    channel_rows = 2 if ib.channels_per_die % 2 == 0 else 1
    columns = (ib.channels_per_die // channel_rows) * ib.pseudo_channels_per_channel * ib.bank_groups_horizontal
    rows = channel_rows * ib.bank_groups_vertical * ib.banks_per_bank_group
    return columns, rows


def tsv_count(config: MemoryConfig, node: TechnologyNode) -> int:
    """Data plus command/power TSVs of every pseudo channel in the stack."""
    return config.pseudo_channels * (bus_width(config) + node.tsv_overhead_per_pseudo_channel)


def die_floorplan(
    config: MemoryConfig, node: TechnologyNode, plan: Optional[MatRoutingPlan] = None
) -> DieFloorplan:
    """
    Die geometry of one design.

    Raises:
        RoutingInfeasibleError: when no plan is passed and the MAT cannot be routed.
    """
    mat = mat_geometry(config, node, plan)
    bank_w, bank_h = bank_dimensions(config, node, mat)
    columns, rows = bank_tiling(config)
    ib = config.inter_bank
    banks = config.banks_per_die

    bank_array_area = banks * bank_w * bank_h / UM2_PER_MM2
    core_x = columns * bank_w / 1000.0

    n_tsv = tsv_count(config, node)
    tsv_area = n_tsv * node.tsv_pitch ** 2 / UM2_PER_MM2
    tsv_strip = tsv_area / core_x

    bank_groups = ib.channels_per_die * ib.pseudo_channels_per_channel * ib.bank_groups_per_pseudo_channel
    bgbus_area = (
        bank_groups
        * bgbus_width(config)
        * node.wire(WireClass.BGBUS).pitch
        * bgbus_length(config, bank_h)
        / UM2_PER_MM2
    )
    pcs_per_die = ib.channels_per_die * ib.pseudo_channels_per_channel
    gbus_area = (
        pcs_per_die
        * bus_width(config)
        * node.wire(WireClass.GBUS).pitch
        * gbus_length(config, bank_w, bank_h)
        / UM2_PER_MM2
    )
    peripheral = node.peripheral_base_area + node.peripheral_channel_area * ib.channels_per_die
    die_area = bank_array_area + tsv_area + bgbus_area + gbus_area + peripheral

    raw_bits = banks * config.bank.subarrays_per_bank * config.bank.mats_per_subarray * (
        config.mat.wls_per_mat * config.mat.bls_per_mat
    )
    cell_area = raw_bits * node.cell_width * node.cell_height / UM2_PER_MM2

    floorplan = DieFloorplan(
        mat=mat,
        bank_width=bank_w / 1000.0,
        bank_height=bank_h / 1000.0,
        bank_columns=columns,
        bank_rows=rows,
        banks_per_die=banks,
        bank_array_area=bank_array_area,
        tsv_count=n_tsv,
        tsv_region_area=tsv_area,
        tsv_strip_height=tsv_strip,
        bgbus_area=bgbus_area,
        gbus_area=gbus_area,
        peripheral_area=peripheral,
        die_area=die_area,
        array_efficiency=cell_area / die_area,
    )
    logger.debug(f"Die {floorplan.die_len_x:.2f} x {floorplan.die_len_y:.2f} mm, {die_area:.2f} mm^2")
    return floorplan


def total_area(config: MemoryConfig, node: TechnologyNode, floorplan: Optional[DieFloorplan] = None) -> float:
    """Silicon area of the whole stack (mm^2)."""
    if floorplan is None:
        floorplan = die_floorplan(config, node)
    return floorplan.die_area * config.dies
