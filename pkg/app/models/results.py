# app/models/results.py

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from app.models.enums import DatapathStageKind, RoutingScheme, Tier, WireClass


@dataclass(frozen=True)
class WireRun:
    """A bundle of identical wires. `total_cap` is per wire, independent of `count`."""
    wire_class: WireClass
    count: int
    length: float
    pitch: float
    cap_per_len: float

    @property
    def total_cap(self) -> float:
        return self.length * self.cap_per_len

    @property
    def track_demand(self) -> float:
        return self.count * self.pitch

    def to_dict(self) -> Dict[str, Any]:
        return {
            "wire_class": self.wire_class.value,
            "count": self.count,
            "length_um": self.length,
            "pitch_um": self.pitch,
            "cap_per_len_ff_per_um": self.cap_per_len,
            "total_cap_ff": self.total_cap,
        }


@dataclass(frozen=True)
class MatRegions:
    """Transistor-limited spans of the three routing regions of a MAT (um)."""
    cell_array_width: float
    cell_array_height: float
    lwd_transistor: float
    blsa_transistor: float
    max_strip_growth: float

    @property
    def lwd_limit(self) -> float:
        return self.lwd_transistor * self.max_strip_growth

    @property
    def blsa_limit(self) -> float:
        return self.blsa_transistor * self.max_strip_growth


@dataclass(frozen=True)
class MatRoutingPlan:
    scheme: RoutingScheme
    regions: MatRegions
    over_cell_array: List[WireRun] = field(default_factory=list)
    over_lwd: List[WireRun] = field(default_factory=list)
    over_blsa: List[WireRun] = field(default_factory=list)
    csl_one_hot: int = 0
    csl_binary: int = 0
    csl_groups: int = 0

    @staticmethod
    def demand(runs: List[WireRun]) -> float:
        return sum(run.track_demand for run in runs)

    @property
    def lwd_demand(self) -> float:
        return self.demand(self.over_lwd)

    @property
    def blsa_demand(self) -> float:
        return self.demand(self.over_blsa)

    @property
    def cell_array_demand(self) -> float:
        return self.demand(self.over_cell_array)

    def find(self, wire_class: WireClass) -> Optional[WireRun]:
        for run in self.over_cell_array + self.over_lwd + self.over_blsa:
            if run.wire_class == wire_class:
                return run
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scheme": self.scheme.value,
            "csl_one_hot": self.csl_one_hot,
            "csl_binary": self.csl_binary,
            "csl_groups": self.csl_groups,
            "over_cell_array": [run.to_dict() for run in self.over_cell_array],
            "over_lwd": [run.to_dict() for run in self.over_lwd],
            "over_blsa": [run.to_dict() for run in self.over_blsa],
            "demand_um": {
                "cell_array": self.cell_array_demand,
                "lwd": self.lwd_demand,
                "blsa": self.blsa_demand,
            },
        }


@dataclass(frozen=True)
class MatGeometry:
    """MAT dimensions in um."""
    width: float
    height: float
    cell_array_width: float
    cell_array_height: float
    blsa_strip_height: float
    lwd_strip_width: float

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class DieFloorplan:
    """
    Die-level geometry. Lengths and areas in mm / mm^2. The outline is the bank
    core (bank tiling plus the TSV strip) grown by one uniform margin until it
    encloses `die_area`.
    """
    mat: MatGeometry
    bank_width: float
    bank_height: float
    bank_columns: int
    bank_rows: int
    banks_per_die: int
    bank_array_area: float
    tsv_count: int
    tsv_region_area: float
    tsv_strip_height: float
    bgbus_area: float
    gbus_area: float
    peripheral_area: float
    die_area: float
    array_efficiency: float

    @property
    def core_len_x(self) -> float:
        return self.bank_columns * self.bank_width

    @property
    def core_len_y(self) -> float:
        return self.bank_rows * self.bank_height + self.tsv_strip_height

    @property
    def margin(self) -> float:
        # m with (core_x + m)(core_y + m) == die_area
        core_x, core_y = self.core_len_x, self.core_len_y
        s = core_x + core_y
        return (-s + math.sqrt(s * s - 4.0 * (core_x * core_y - self.die_area))) / 2.0

    @property
    def die_len_x(self) -> float:
        return self.core_len_x + self.margin

    @property
    def die_len_y(self) -> float:
        return self.core_len_y + self.margin

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["mat"] = asdict(self.mat)
        data["die_len_x"] = self.die_len_x
        data["die_len_y"] = self.die_len_y
        return data


@dataclass(frozen=True)
class BitlineLoad:
    c_cell: float
    n_wl: int
    c_bl_per_wl: float
    c_blsa_effective: float

    @property
    def total(self) -> float:
        return self.c_cell + self.n_wl * self.c_bl_per_wl + self.c_blsa_effective


@dataclass(frozen=True)
class TimingResult:
    """All times in ns, core frequency in MHz."""
    tRP: float
    tRCD: float
    tCL: float
    bank_cycle: float
    tCCDL: float
    tCCDS: float
    miss_latency: float
    core_frequency: float


@dataclass(frozen=True)
class EnergyEvent:
    """One term of the wire-energy sum; `energy` is in pJ."""
    name: str
    alpha: float
    n: float
    cap_per_len: float
    length: float
    dv_internal: float
    v_external: float

    @property
    def energy(self) -> float:
        # fF * V^2 = fJ
        return 0.5 * self.alpha * self.n * self.cap_per_len * self.length * self.dv_internal * self.v_external / 1000.0


@dataclass(frozen=True)
class AccessEnergy:
    """Energies in pJ, per-bit figures in pJ/b."""
    act_energy: float
    pre_energy: float
    column_energy: float
    datapath_energy: float
    full_row_epb: float
    closed_row_epb: float
    events: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class DatapathStage:
    """
    One stage of the read path of a pseudo channel. `rate` is per wire (Gb/s);
    `parallel` counts streams that run side by side (bank-group interleave).
    """
    stage: DatapathStageKind
    width: float
    rate: float
    mux_ratio: int = 1
    parallel: int = 1

    @property
    def throughput(self) -> float:
        return self.width * self.rate * self.parallel

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["stage"] = self.stage.value
        data["throughput_gbps"] = self.throughput
        return data


@dataclass(frozen=True)
class DesignMetrics:
    config_id: str
    tier: Tier
    bandwidth_gbs: float
    capacity_gb: float
    epb_full: float
    epb_closed: float
    miss_latency_ns: float
    die_area_mm2: float
    total_area_mm2: float
    power_w: float
    edp: float
    capacity_per_area: float
    core_frequency_mhz: float
    pumps: int
    dies: int
    die_len_x_mm: float
    die_len_y_mm: float
    tRP: float
    tRCD: float
    tCL: float
    tCCDL: float
    tCCDS: float
    name: str = ""

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["tier"] = self.tier.value
        return data


@dataclass(frozen=True)
class DesignReport:
    """Everything computed for one design; the dumps are views of this."""
    metrics: DesignMetrics
    floorplan: DieFloorplan
    routing: MatRoutingPlan
    datapath_runs: List[WireRun]
    stages: List[DatapathStage]
    timing: TimingResult
    energy: AccessEnergy


@dataclass(frozen=True)
class SkippedDesign:
    index: int
    reason: str
    detail: str
    config_id: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class HullReport:
    tier: Tier
    points: int
    volume_fraction: float
    sample_count: int
    hits: int
    std_error: float

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["tier"] = self.tier.value
        return data


@dataclass(frozen=True)
class TimingBasis:
    """Geometry terms every timing ratio is taken against."""
    bank_width: float
    sense_load: float
    restore_load: float
    latency_path: float
    csl_cap: float
    ldl_cap: float
    mdl_cap: float
