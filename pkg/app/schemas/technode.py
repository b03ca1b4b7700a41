# app/schemas/technode.py

"""
==========================================================
            TECHNOLOGY NODE DOCUMENT SCHEMAS
==========================================================

  Physical constants of one DRAM process node and the
  parameters that derive a scaled node from it.

  Every scalable field carries two tags in its schema
  metadata:

  - dim:      length | area | capacitance | cap_per_length | fixed
  - category: capacitances | logic | sense_amplifiers |
              wordline_drivers | geometry

  Units: um, um^2, mm^2 (peripheral), fF, fF/um, Ohm, V,
  ns, ns/mm, Gb/s.

==========================================================
"""

from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.enums import WireClass


def _tag(dim: str, category: Optional[str] = None) -> Dict[str, Any]:
    extra: Dict[str, Any] = {"dim": dim}
    if category:
        extra["category"] = category
    return extra


def scaled(default: Any, dim: str, category: str, description: str, **kwargs: Any) -> Any:
    """Field carrying its dimension kind and scaling category."""
    return Field(default, description=description, json_schema_extra=_tag(dim, category), **kwargs)


def fixed(default: Any, description: str, **kwargs: Any) -> Any:
    """Field that never changes with the feature size."""
    return Field(default, description=description, json_schema_extra=_tag("fixed"), **kwargs)


class _NodeModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class WireTech(_NodeModel):
    """Pitch (width + spacing), capacitance and signalling of one wire class."""
    pitch: Optional[float] = scaled(None, "length", "geometry", "Track pitch (um)", gt=0)
    cap_per_len: Optional[float] = scaled(
        None, "cap_per_length", "capacitances", "Capacitance per length incl. drivers (fF/um)", gt=0
    )
    swing: float = fixed(..., "Internal voltage swing (V)", gt=0)
    alpha: float = fixed(0.5, "Activity factor for one firing", ge=0, le=1)


class TimingReference(_NodeModel):
    """
    Timing of the reference design on this node. Every timing of another design
    is this value times a geometry ratio against `reference_config`.
    """
    reference_config: str = fixed("hbm3_baseline", "Config name or path the timings belong to")
    tRP: float = fixed(..., "Precharge time (ns)", gt=0)
    tRCD: float = fixed(..., "Activate-to-column time (ns)", gt=0)
    tCL: float = fixed(..., "Read latency (ns)", gt=0)
    row_signal_fraction: float = fixed(0.4, "Signal share of tRCD/tRP; the rest is bitline", ge=0, le=1)
    t_csl: float = fixed(..., "CSL term of the bank cycle (ns)", gt=0)
    t_ldl: float = fixed(..., "LDL term of the bank cycle (ns)", gt=0)
    t_mdl: float = fixed(..., "MDL term of the bank cycle (ns)", gt=0)
    mdl_precharge_ratio: float = fixed(0.5, "t_MDL,PRE as a fraction of t_MDL", ge=0)
    t_drv: float = fixed(..., "Constant driver delay (ns)", ge=0)
    blsa_sense_time: float = fixed(1.0, "Lower bound on tRCD (ns)", gt=0)

    @property
    def bank_cycle(self) -> float:
        return self.t_drv + self.t_csl + self.t_ldl + self.t_mdl * (1.0 + self.mdl_precharge_ratio)


class TechnologyNode(_NodeModel):
    name: str = Field(..., description="Node label, e.g. 2ynm")
    description: Optional[str] = Field(None)
    provenance: Dict[str, str] = Field(default_factory=dict, description="Per-value source notes")

    # cell and array
    cell_width: float = scaled(..., "length", "geometry", "Cell footprint along the WL (um)", gt=0)
    cell_height: float = scaled(..., "length", "geometry", "Cell footprint along the BL (um)", gt=0)
    c_cell: float = scaled(..., "capacitance", "capacitances", "Cell capacitance (fF)", gt=0)
    c_bl_per_wl: float = scaled(..., "capacitance", "capacitances", "Bitline cap per crossing WL (fF)", gt=0)
    c_blsa: float = scaled(..., "capacitance", "sense_amplifiers", "BLSA input capacitance (fF)", gt=0)
    blsa_height: float = scaled(..., "length", "sense_amplifiers", "BLSA strip height (um)", gt=0)
    mdl_driver_area: float = scaled(..., "area", "sense_amplifiers", "One MDL driver (um^2)", gt=0)
    lwd_width: float = scaled(..., "length", "wordline_drivers", "LWD strip width (um)", gt=0)
    max_strip_growth: float = fixed(2.0, "Strip may widen to this multiple for routing", ge=1)

    # bank and die logic
    row_decoder_width: float = scaled(..., "length", "logic", "Row decoder beside each bank (um)", gt=0)
    column_decoder_height: float = scaled(..., "length", "logic", "Column decoder below each bank (um)", gt=0)
    salp_latch_width: float = scaled(..., "length", "logic", "Per-subarray row-address latches (um)", gt=0)
    peripheral_base_area: float = scaled(..., "area", "logic", "Per-die periphery (mm^2)", gt=0)
    peripheral_channel_area: float = scaled(..., "area", "logic", "Periphery per channel on a die (mm^2)", ge=0)

    # stack
    r_tsv: float = fixed(..., "TSV resistance (Ohm)", gt=0)
    c_tsv: float = scaled(..., "capacitance", "capacitances", "TSV capacitance per die (fF)", gt=0)
    tsv_pitch: float = fixed(..., "TSV pitch (um)", gt=0)
    tsv_height: float = fixed(..., "TSV length through one die (um)", gt=0)
    tsv_overhead_per_pseudo_channel: int = fixed(64, "Command/power TSVs per pseudo channel", ge=0)
    dq_length: float = fixed(..., "Base die to host interface run (um)", gt=0)

    # electrical
    v_external: float = fixed(..., "External supply (V)", gt=0)
    die_traverse_time_per_mm: float = fixed(..., "Signal time across a die (ns/mm)", gt=0)
    bgbus_max_rate: float = fixed(2.0, "BGBUS wire rate ceiling (Gb/s)", gt=0)
    gbus_max_rate: float = fixed(4.0, "GBUS wire rate ceiling (Gb/s)", gt=0)
    tsv_max_rate: float = fixed(4.0, "TSV rate ceiling (Gb/s)", gt=0)

    wires: Dict[WireClass, WireTech]
    timing: TimingReference

    @model_validator(mode="after")
    def check_wire_classes(self) -> "TechnologyNode":
        on_die = (
            WireClass.WL, WireClass.MWL, WireClass.LWLSEL, WireClass.BL, WireClass.CSL,
            WireClass.LSL, WireClass.LDL, WireClass.MDL, WireClass.BGBUS, WireClass.GBUS,
        )
        for wire_class in on_die:
            tech = self.wires.get(wire_class)
            if tech is None or tech.pitch is None or tech.cap_per_len is None:
                raise ValueError(f"wire class {wire_class.value} needs pitch and cap_per_len")
        if WireClass.TSV not in self.wires:
            raise ValueError("wire class TSV needs a swing entry")
        dq = self.wires.get(WireClass.DQ)
        if dq is None or dq.cap_per_len is None:
            raise ValueError("wire class DQ needs cap_per_len")
        return self

    def wire(self, wire_class: WireClass) -> WireTech:
        return self.wires[wire_class]

    @property
    def tsv_cap_per_len(self) -> float:
        return self.c_tsv / self.tsv_height


class ScalingConfidence(_NodeModel):
    """How far each category follows ideal scaling: 0 keeps the value, 1 scales ideally."""
    capacitances: float = Field(0.0, ge=0, le=1)
    logic: float = Field(0.0, ge=0, le=1)
    sense_amplifiers: float = Field(0.0, ge=0, le=1)
    wordline_drivers: float = Field(0.0, ge=0, le=1)
    geometry: float = Field(1.0, ge=0, le=1)

    def for_category(self, category: str) -> float:
        return getattr(self, category)


class NodeScaling(_NodeModel):
    """A node-scaling document: ratio, confidences and post-scaling overrides."""
    name: str = Field(..., description="Target node label, e.g. 1znm")
    description: Optional[str] = Field(None)
    feature_ratio: float = Field(..., description="Scaled feature size / unscaled feature size")
    confidence: ScalingConfidence = Field(default_factory=ScalingConfidence)
    overrides: Dict[str, Any] = Field(
        default_factory=dict, description="Dotted node fields set after scaling, e.g. wires.BL.swing"
    )
