"""
==========================================================
                  MAT ROUTING SERVICE MODULE
==========================================================

  Places the column-path wires of a MAT into its three
  routing regions and checks that they fit.

  - Conventional: CSLs over the cell array, MDLs over
    the LWD strip, LDLs over the BLSA strip
  - DLOMAT: MDLs over the cell array, one-hot plus
    binary CSLs over the LWD strip, LSLs over the BLSA
    strip; MDL drivers move into the BLSA strip

  Strips may grow up to node.max_strip_growth times
  their transistor size; anything beyond raises
  RoutingInfeasibleError.

==========================================================
"""

import logging
from typing import List, Tuple

from app.core.exceptions import RoutingInfeasibleError
from app.models.enums import RoutingScheme, WireClass
from app.models.results import DieFloorplan, MatRegions, MatRoutingPlan, WireRun
from app.schemas.config import MatParams, MemoryConfig
from app.schemas.technode import TechnologyNode

logger = logging.getLogger(__name__)

# float slack on track-fit comparisons
_FIT_TOLERANCE = 1e-9


def mat_regions(mat: MatParams, node: TechnologyNode) -> MatRegions:
    """Transistor-limited spans of the cell array and the two strips (um)."""
    cell_array_width = mat.bls_per_mat * node.wire(WireClass.BL).pitch * (1.0 + mat.odecc_overhead)
    cell_array_height = mat.wls_per_mat * node.wire(WireClass.WL).pitch
    blsa = node.blsa_height
    if mat.dlomat_enabled:
        # relocated MDL drivers spread along the BLSA strip
        blsa += mat.mdls_per_mat * node.mdl_driver_area / cell_array_width
    return MatRegions(
        cell_array_width=cell_array_width,
        cell_array_height=cell_array_height,
        lwd_transistor=node.lwd_width,
        blsa_transistor=blsa,
        max_strip_growth=node.max_strip_growth,
    )


def wire_run(wire_class: WireClass, count: int, node: TechnologyNode, length: float = 0.0) -> WireRun:
    tech = node.wire(wire_class)
    return WireRun(
        wire_class=wire_class,
        count=count,
        length=length,
        pitch=tech.pitch or 0.0,
        cap_per_len=tech.cap_per_len or 0.0,
    )


def wire_capacitance(run: WireRun) -> float:
    """Capacitance of one wire of the run (fF)."""
    return run.total_cap


def csl_binary_lines(groups: int, pumps: int) -> int:
    """ceil(log2(groups / pumps)) address lines that stay fixed across the pumps of an atom."""
    return max(0, (groups // pumps - 1).bit_length())


def decode_column_select(groups: int, pumps: int) -> List[Tuple[int, int]]:
    """
    (one-hot line, binary code) that selects each CSL group. One one-hot line fires
    per pump; the binary code extends the column address.
    """
    return [(group % pumps, group // pumps) for group in range(groups)]


def _check_fit(region: str, runs: List[WireRun], available: float, scheme: RoutingScheme) -> None:
    demand = MatRoutingPlan.demand(runs)
    if demand > available + _FIT_TOLERANCE:
        detail = ", ".join(f"{run.count} x {run.wire_class.value} @ {run.pitch:g} um" for run in runs)
        raise RoutingInfeasibleError(region, demand, available, f"{scheme.value}: {detail}")


def _check_plan(plan: MatRoutingPlan) -> MatRoutingPlan:
    regions = plan.regions
    _check_fit("cell array", plan.over_cell_array, regions.cell_array_width, plan.scheme)
    _check_fit("LWD strip", plan.over_lwd, regions.lwd_limit, plan.scheme)
    _check_fit("BLSA strip", plan.over_blsa, regions.blsa_limit, plan.scheme)
    return plan


def plan_conventional(
    mat: MatParams,
    node: TechnologyNode,
    ldl_multiplier: int = 1,
    vertical_length: float = 0.0,
    horizontal_length: float = 0.0,
) -> MatRoutingPlan:
    """
    Conventional MAT: each one-hot CSL selects `mdls_per_mat` bitlines.

    `vertical_length` applies to CSLs and MDLs (they span the bank),
    `horizontal_length` to LDLs (they span the MAT). Both are zero for a pure
    track-fit plan.

    Raises:
        RoutingInfeasibleError: a region cannot hold its tracks.
    """
    groups = mat.bls_per_mat // mat.mdls_per_mat
    plan = MatRoutingPlan(
        scheme=RoutingScheme.CONVENTIONAL,
        regions=mat_regions(mat, node),
        over_cell_array=[wire_run(WireClass.CSL, groups, node, vertical_length)],
        over_lwd=[wire_run(WireClass.MDL, mat.mdls_per_mat, node, vertical_length)],
        over_blsa=[wire_run(WireClass.LDL, mat.ldls_per_mat * ldl_multiplier, node, horizontal_length)],
        csl_one_hot=groups,
        csl_binary=0,
        csl_groups=groups,
    )
    return _check_plan(plan)


def plan_dlomat(
    mat: MatParams,
    pumps: int,
    node: TechnologyNode,
    vertical_length: float = 0.0,
    horizontal_length: float = 0.0,
) -> MatRoutingPlan:
    """
    DLOMAT: MDLs take the CSL tracks over the cell array, the CSLs move over the
    LWDs as `pumps` one-hot lines plus binary lines, and one LSL per CSL group
    replaces the LDLs.

    Raises:
        RoutingInfeasibleError: fewer CSL groups than pumps, or a region overflows.
    """
    groups = mat.bls_per_mat // mat.mdls_per_mat
    if groups < pumps:
        raise RoutingInfeasibleError(
            "CSL decode", pumps, groups, f"{groups} CSL groups cannot serve {pumps} pumps", unit="lines"
        )
    binary = csl_binary_lines(groups, pumps)
    plan = MatRoutingPlan(
        scheme=RoutingScheme.DLOMAT,
        regions=mat_regions(mat, node),
        over_cell_array=[wire_run(WireClass.MDL, mat.mdls_per_mat, node, vertical_length)],
        over_lwd=[wire_run(WireClass.CSL, pumps + binary, node, vertical_length)],
        over_blsa=[wire_run(WireClass.LSL, groups, node, horizontal_length)],
        csl_one_hot=pumps,
        csl_binary=binary,
        csl_groups=groups,
    )
    return _check_plan(plan)


def plan_mat_routing(
    config: MemoryConfig,
    node: TechnologyNode,
    vertical_length: float = 0.0,
    horizontal_length: float = 0.0,
) -> MatRoutingPlan:
    """Routing plan for the scheme the config selects."""
    if config.mat.dlomat_enabled:
        return plan_dlomat(config.mat, config.pumps_per_atom, node, vertical_length, horizontal_length)
    ldl_multiplier = 2 if config.subarray.partial_page.doubles_ldls else 1
    return plan_conventional(config.mat, node, ldl_multiplier, vertical_length, horizontal_length)


def bgbus_width(config: MemoryConfig) -> int:
    """BGBUS wires per bank group: the bank data width over the mux ratio."""
    bank_bits = config.bank.mats_per_subarray * config.mat.mdls_per_mat
    return max(1, bank_bits // config.inter_bank.bgbus_mux_ratio)


def bus_width(config: MemoryConfig) -> int:
    """GBUS and TSV wires per pseudo channel."""
    return max(1, config.atom_bits // config.inter_bank.bgbus_mux_ratio)


def bgbus_length(config: MemoryConfig, bank_height_um: float) -> float:
    return config.inter_bank.banks_per_bank_group * bank_height_um


def gbus_length(config: MemoryConfig, bank_width_um: float, bank_height_um: float) -> float:
    """From the farthest bank-group mux to the TSV strip."""
    ib = config.inter_bank
    vertical = (ib.bank_groups_vertical - 1) * ib.banks_per_bank_group * bank_height_um
    horizontal = ib.bank_groups_horizontal * bank_width_um / 2.0
    return vertical + horizontal


def global_datapath(config: MemoryConfig, floorplan: DieFloorplan, node: TechnologyNode) -> List[WireRun]:
    """BGBUS, GBUS, TSV and DQ runs of one pseudo channel, lengths in um."""
    bank_w = floorplan.bank_width * 1000.0
    bank_h = floorplan.bank_height * 1000.0
    dq_per_pc = max(1, config.inter_bank.dq_per_stack // config.pseudo_channels)
    dq = node.wire(WireClass.DQ)
    return [
        wire_run(WireClass.BGBUS, bgbus_width(config), node, bgbus_length(config, bank_h)),
        wire_run(WireClass.GBUS, bus_width(config), node, gbus_length(config, bank_w, bank_h)),
        WireRun(
            wire_class=WireClass.TSV,
            count=bus_width(config),
            length=config.dies * node.tsv_height,
            pitch=node.tsv_pitch,
            cap_per_len=node.tsv_cap_per_len,
        ),
        WireRun(
            wire_class=WireClass.DQ,
            count=dq_per_pc,
            length=node.dq_length,
            pitch=dq.pitch or 0.0,
            cap_per_len=dq.cap_per_len or 0.0,
        ),
    ]


def plan_with_lengths(config: MemoryConfig, node: TechnologyNode, floorplan: DieFloorplan) -> MatRoutingPlan:
    """Plan whose runs carry real lengths: bank height for CSL/MDL, MAT width for LDL/LSL."""
    return plan_mat_routing(
        config,
        node,
        vertical_length=floorplan.bank_height * 1000.0,
        horizontal_length=floorplan.mat.width,
    )
