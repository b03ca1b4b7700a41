# app/schemas/config.py

from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config.settings import settings
from app.models.enums import PartialPageKind, SalpKind


class _Frozen(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SalpMode(_Frozen):
    """
    Subarray-level parallelism mode.

    Accepts the shorthand strings `none`, `all` and `groups:<g>` as well as the
    object form.
    """
    kind: SalpKind = Field(SalpKind.NONE, description="none, groups or all")
    groups: int = Field(1, ge=1, description="Subarray group count (groups mode only)")

    @model_validator(mode="before")
    @classmethod
    def parse_shorthand(cls, data: Any) -> Any:
        if isinstance(data, str):
            text = data.strip().lower()
            if text.startswith("groups:"):
                return {"kind": SalpKind.GROUPS, "groups": int(text.split(":", 1)[1])}
            return {"kind": text}
        return data

    @property
    def buffer_subarrays(self) -> int:
        if self.kind == SalpKind.GROUPS and self.groups >= 2:
            return self.groups - 1
        return 0

    def label(self) -> str:
        if self.kind == SalpKind.GROUPS:
            return f"groups:{self.groups}"
        return self.kind.value


class PartialPage(_Frozen):
    """
    Partial page strategy.

    Shorthand strings: `full`, `half`, `half_independent`, `subchannels:<n>`.
    """
    kind: PartialPageKind = Field(PartialPageKind.FULL)
    count: int = Field(1, ge=1, description="Subchannel count (subchannels only)")
    independent_mdls: bool = Field(False, description="Half page keeps MDL subsets independent")

    @model_validator(mode="before")
    @classmethod
    def parse_shorthand(cls, data: Any) -> Any:
        if isinstance(data, str):
            text = data.strip().lower()
            if text.startswith("subchannels:"):
                return {"kind": PartialPageKind.SUBCHANNELS, "count": int(text.split(":", 1)[1])}
            if text == "half_independent":
                return {"kind": PartialPageKind.HALF, "independent_mdls": True}
            return {"kind": text}
        return data

    @property
    def divisor(self) -> int:
        """Factor by which the activated page shrinks."""
        if self.kind == PartialPageKind.HALF:
            return 2
        if self.kind == PartialPageKind.SUBCHANNELS:
            return self.count
        return 1

    @property
    def doubles_ldls(self) -> bool:
        return self.kind == PartialPageKind.HALF and not self.independent_mdls

    def label(self) -> str:
        if self.kind == PartialPageKind.SUBCHANNELS:
            return f"subchannels:{self.count}"
        if self.kind == PartialPageKind.HALF and self.independent_mdls:
            return "half_independent"
        return self.kind.value


class InterBankParams(_Frozen):
    ranks: int = Field(..., ge=1)
    channels: int = Field(..., ge=1, description="Channels per rank (stack-wide)")
    channels_per_die: int = Field(..., ge=1)
    pseudo_channels_per_channel: int = Field(2, ge=1)
    bank_groups_horizontal: int = Field(..., ge=1)
    bank_groups_vertical: int = Field(..., ge=1)
    banks_per_bank_group: int = Field(..., ge=1)
    bgbus_mux_ratio: int = Field(1, ge=1)
    adl_enabled: bool = Field(False, description="Alternative data line: tCCDS = tCCDL / 2")
    dq_per_stack: int = Field(1024, ge=1, description="Data pins per stack (bits)")
    dq_data_rate: float = Field(..., gt=0, description="Gb/s per pin")

    @property
    def bank_groups_per_pseudo_channel(self) -> int:
        return self.bank_groups_horizontal * self.bank_groups_vertical


class BankParams(_Frozen):
    subarrays_per_bank: int = Field(..., ge=1)
    mats_per_subarray: int = Field(..., ge=1)
    repair_subarrays: int = Field(0, ge=0, description="Area only, never capacity")
    salp_mode: SalpMode = Field(default_factory=SalpMode)


class SubarrayParams(_Frozen):
    partial_page: PartialPage = Field(default_factory=PartialPage)
    ocsa_enabled: bool = Field(False)


class MatParams(_Frozen):
    wls_per_mat: int = Field(..., ge=1)
    bls_per_mat: int = Field(..., ge=1)
    mdls_per_mat: int = Field(..., ge=1)
    ldls_per_mat: int = Field(..., ge=1)
    wl_isolation_overhead: float = Field(0.0, ge=0.0, lt=1.0)
    bl_isolation_overhead: float = Field(0.0, ge=0.0, lt=1.0)
    odecc_overhead: float = Field(0.0, ge=0.0, lt=1.0)
    dlomat_enabled: bool = Field(False)


class MemoryConfig(_Frozen):
    """
    One complete design point. Structural invariants that span several fields are
    checked by `app.services.validation.validate_memory_config`.
    """
    name: str = Field("", description="Free-form label, excluded from the content hash")
    inter_bank: InterBankParams
    bank: BankParams
    subarray: SubarrayParams = Field(default_factory=SubarrayParams)
    mat: MatParams
    atom_bytes: int = Field(32, description="Fixed channel transfer unit")

    @property
    def atom_bits(self) -> int:
        return self.atom_bytes * 8

    @property
    def dies(self) -> int:
        """Ranks stack vertically sharing channel TSVs."""
        ib = self.inter_bank
        return ib.ranks * (ib.channels // ib.channels_per_die)

    @property
    def pseudo_channels(self) -> int:
        """Pseudo channels of one rank; they set the stack's parallel data paths."""
        return self.inter_bank.channels * self.inter_bank.pseudo_channels_per_channel

    @property
    def banks_per_pseudo_channel(self) -> int:
        return self.inter_bank.bank_groups_per_pseudo_channel * self.inter_bank.banks_per_bank_group

    @property
    def banks_per_die(self) -> int:
        ib = self.inter_bank
        return ib.channels_per_die * ib.pseudo_channels_per_channel * self.banks_per_pseudo_channel

    @property
    def active_mats(self) -> int:
        """MATs opened by one activation."""
        return self.bank.mats_per_subarray // self.subarray.partial_page.divisor

    @property
    def page_bits(self) -> int:
        return self.active_mats * self.mat.bls_per_mat

    @property
    def mdl_bits_per_access(self) -> int:
        """MDL bits fired by one column cycle of one bank."""
        mats = self.active_mats
        if self.subarray.partial_page.doubles_ldls:
            # doubled LDLs let the half page reach every MDL of the subarray
            mats = self.bank.mats_per_subarray
        return mats * self.mat.mdls_per_mat

    @property
    def physical_subarrays(self) -> int:
        return (
            self.bank.subarrays_per_bank
            + self.bank.repair_subarrays
            + self.bank.salp_mode.buffer_subarrays
        )

    @property
    def pumps_per_atom(self) -> int:
        bits = self.mdl_bits_per_access
        return max(1, -(-self.atom_bits // bits))


class SweepFilters(_Frozen):
    """Post-evaluation limits; unset fields take the configured defaults."""
    max_dies: int = Field(default_factory=lambda: settings.MAX_DIES, ge=1)
    max_die_len_mm: float = Field(default_factory=lambda: settings.MAX_DIE_LEN_MM, gt=0)
    max_die_width_mm: float = Field(default_factory=lambda: settings.MAX_DIE_WIDTH_MM, gt=0)


class SweepSpec(_Frozen):
    """
    Cartesian design-space description. `parameters` maps dotted MemoryConfig
    fields (e.g. `inter_bank.channels`) to value lists; unlisted fields keep the
    baseline value. Order of `parameters` is the enumeration order.
    """
    name: str = Field("")
    baseline: str = Field("hbm3_baseline", description="Bundled config name or path")
    parameters: dict[str, list[Any]] = Field(default_factory=dict)
    filters: SweepFilters = Field(default_factory=SweepFilters)
    description: Optional[str] = Field(None)

    @model_validator(mode="after")
    def check_parameters(self) -> "SweepSpec":
        """Every listed value must be a valid setting of its field on its own."""
        # validation imports this module
        from app.services.validation import validate_sweep_parameters

        validate_sweep_parameters(self.parameters)
        return self
