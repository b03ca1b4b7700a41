# app/services/capacity_bandwidth.py

import logging
from typing import List

from app.models.enums import DatapathStageKind
from app.models.results import DatapathStage, TimingResult
from app.schemas.config import MemoryConfig
from app.schemas.technode import TechnologyNode
from app.services.routing import bgbus_width, bus_width

logger = logging.getLogger(__name__)

BYTES_PER_GB = 2 ** 30


def capacity_bits(config: MemoryConfig) -> int:
    """Addressable bits of the stack. Repair, buffer and OD-ECC storage do not count."""
    ib = config.inter_bank
    banks = ib.ranks * config.pseudo_channels * config.banks_per_pseudo_channel
    cells = config.bank.subarrays_per_bank * config.bank.mats_per_subarray * config.mat.wls_per_mat
    return banks * cells * config.mat.bls_per_mat


def capacity(config: MemoryConfig) -> float:
    """Stack capacity in GB (2^30 bytes)."""
    return capacity_bits(config) / 8 / BYTES_PER_GB


def bank_interleave(config: MemoryConfig) -> int:
    """Bank groups streaming side by side into one pseudo channel."""
    return 2 if config.inter_bank.adl_enabled else 1


def _capped_stage(
    kind: DatapathStageKind,
    upstream: float,
    width: float,
    ceiling: float,
    mux_ratio: int = 1,
    parallel: int = 1,
) -> DatapathStage:
    """A bus runs at the rate its upstream needs, up to the node ceiling."""
    required = upstream / (width * parallel)
    return DatapathStage(kind, width, min(required, ceiling), mux_ratio, parallel)


def datapath_stages(config: MemoryConfig, timing: TimingResult, node: TechnologyNode) -> List[DatapathStage]:
    """
    Stage trace of one pseudo channel from the MDLs out to the DQs; each stage
    carries min(upstream, its own capacity) in Gb/s.
    """
    ib = config.inter_bank
    interleave = bank_interleave(config)
    mux = ib.bgbus_mux_ratio

    mdl = DatapathStage(
        DatapathStageKind.MDL,
        width=config.bank.mats_per_subarray * config.mat.mdls_per_mat,
        rate=1.0 / timing.bank_cycle,
        parallel=interleave,
    )
    bgbus = _capped_stage(
        DatapathStageKind.BGBUS, mdl.throughput, bgbus_width(config), node.bgbus_max_rate, mux, interleave
    )
    gbus = _capped_stage(DatapathStageKind.GBUS, bgbus.throughput, bus_width(config), node.gbus_max_rate, mux)
    tsv = _capped_stage(DatapathStageKind.TSV, gbus.throughput, bus_width(config), node.tsv_max_rate, mux)
    dq_width = ib.dq_per_stack / config.pseudo_channels
    dq = _capped_stage(DatapathStageKind.DQ, tsv.throughput, dq_width, ib.dq_data_rate)
    return [mdl, bgbus, gbus, tsv, dq]


def bandwidth(config: MemoryConfig, timing: TimingResult, node: TechnologyNode) -> float:
    """Peak stack bandwidth in GB/s. Ranks share channel TSVs and add no bandwidth."""
    stages = datapath_stages(config, timing, node)
    per_pc = stages[-1].throughput
    return per_pc * config.pseudo_channels / 8.0
