"""
==========================================================
                VALIDATION UTILITIES
==========================================================

  Structural invariants of a design configuration that
  span several fields. Single-field ranges live on the
  pydantic schemas; everything here raises
  ConfigValidationError naming the dotted field.

==========================================================
"""

from typing import Annotated, Any, Dict, Iterable, List

from pydantic import TypeAdapter, ValidationError

from app.core.exceptions import ConfigValidationError
from app.models.enums import PartialPageKind, SalpKind
from app.schemas.config import (
    BankParams,
    InterBankParams,
    MatParams,
    MemoryConfig,
    PartialPage,
    SalpMode,
    SubarrayParams,
)

ATOM_BYTES = 32

# counts that may carry one factor of three
FACTOR_THREE_FIELDS = (
    "inter_bank.channels",
    "inter_bank.channels_per_die",
    "bank.subarrays_per_bank",
)

POWER_OF_TWO_FIELDS = (
    "inter_bank.ranks",
    "inter_bank.pseudo_channels_per_channel",
    "inter_bank.bank_groups_horizontal",
    "inter_bank.bank_groups_vertical",
    "inter_bank.banks_per_bank_group",
    "inter_bank.bgbus_mux_ratio",
    "inter_bank.dq_per_stack",
    "bank.mats_per_subarray",
    "mat.wls_per_mat",
    "mat.bls_per_mat",
    "mat.mdls_per_mat",
    "mat.ldls_per_mat",
)


SWEEPABLE_GROUPS = {
    "inter_bank": InterBankParams,
    "bank": BankParams,
    "subarray": SubarrayParams,
    "mat": MatParams,
}


def is_power_of_two(value: int) -> bool:
    return value >= 1 and value & (value - 1) == 0


def is_allowed_count(value: int, allow_factor_three: bool = False) -> bool:
    """True for 2^k, and for 3*2^k when `allow_factor_three`."""
    if is_power_of_two(value):
        return True
    return allow_factor_three and value % 3 == 0 and is_power_of_two(value // 3)


def field_value(config: MemoryConfig, dotted: str):
    value = config
    for part in dotted.split("."):
        value = getattr(value, part)
    return value


def _check_counts(config: MemoryConfig, fields: Iterable[str], allow_factor_three: bool) -> None:
    for dotted in fields:
        value = field_value(config, dotted)
        if not is_allowed_count(value, allow_factor_three):
            allowed = "a power of two or three times one" if allow_factor_three else "a power of two"
            raise ConfigValidationError(dotted, f"count {value} must be {allowed}")


def validate_inter_bank(config: MemoryConfig) -> None:
    ib = config.inter_bank
    if ib.channels % ib.channels_per_die != 0:
        raise ConfigValidationError(
            "inter_bank.channels_per_die",
            f"channels ({ib.channels}) must be divisible by channels_per_die ({ib.channels_per_die})",
        )
    if ib.bgbus_mux_ratio > config.atom_bits:
        raise ConfigValidationError(
            "inter_bank.bgbus_mux_ratio",
            f"mux ratio {ib.bgbus_mux_ratio} exceeds the {config.atom_bits}-bit atom",
        )


def validate_bank(config: MemoryConfig) -> None:
    salp = config.bank.salp_mode
    subarrays = config.bank.subarrays_per_bank
    if salp.kind == SalpKind.GROUPS:
        if salp.groups < 2:
            raise ConfigValidationError("bank.salp_mode", "groups mode needs at least 2 groups")
        if not is_power_of_two(salp.groups):
            raise ConfigValidationError("bank.salp_mode", f"group count {salp.groups} must be a power of two")
        if subarrays % salp.groups != 0:
            raise ConfigValidationError(
                "bank.salp_mode",
                f"group count {salp.groups} must divide subarrays_per_bank ({subarrays})",
            )


def validate_subarray(config: MemoryConfig) -> None:
    page = config.subarray.partial_page
    mats = config.bank.mats_per_subarray
    if page.kind == PartialPageKind.SUBCHANNELS:
        if page.count < 2 or not is_power_of_two(page.count):
            raise ConfigValidationError(
                "subarray.partial_page", f"subchannel count {page.count} must be a power of two >= 2"
            )
        if mats % page.count != 0:
            raise ConfigValidationError(
                "subarray.partial_page",
                f"subchannel count {page.count} must divide mats_per_subarray ({mats})",
            )
    if page.kind == PartialPageKind.HALF and mats % 2 != 0:
        raise ConfigValidationError("subarray.partial_page", f"half page needs an even MAT count, got {mats}")
    if config.page_bits < config.atom_bits:
        raise ConfigValidationError(
            "subarray.partial_page",
            f"activated page of {config.page_bits} bits cannot hold a {config.atom_bits}-bit atom",
        )


def validate_mat(config: MemoryConfig) -> None:
    mat = config.mat
    if mat.bls_per_mat % mat.mdls_per_mat != 0:
        raise ConfigValidationError(
            "mat.mdls_per_mat", f"mdls_per_mat ({mat.mdls_per_mat}) must divide bls_per_mat ({mat.bls_per_mat})"
        )
    if not mat.dlomat_enabled and mat.ldls_per_mat < mat.mdls_per_mat:
        raise ConfigValidationError(
            "mat.ldls_per_mat",
            f"ldls_per_mat ({mat.ldls_per_mat}) must be >= mdls_per_mat ({mat.mdls_per_mat}) without DLOMAT",
        )


def validate_memory_config(config: MemoryConfig) -> MemoryConfig:
    """
    Checks every cross-field invariant of a design point.

    Raises:
        ConfigValidationError: naming the first violated field.
    """
    if config.atom_bytes != ATOM_BYTES:
        raise ConfigValidationError("atom_bytes", f"atom is fixed at {ATOM_BYTES} bytes, got {config.atom_bytes}")
    validate_inter_bank(config)
    validate_bank(config)
    validate_subarray(config)
    validate_mat(config)
    _check_counts(config, FACTOR_THREE_FIELDS, allow_factor_three=True)
    _check_counts(config, POWER_OF_TWO_FIELDS, allow_factor_three=False)
    return config


def _field_adapter(dotted: str) -> TypeAdapter:
    group, _, name = dotted.partition(".")
    model = SWEEPABLE_GROUPS.get(group)
    if model is None or name not in model.model_fields:
        raise ConfigValidationError(dotted, "not a configuration field that can be swept")
    info = model.model_fields[name]
    if info.metadata:
        return TypeAdapter(Annotated[(info.annotation, *info.metadata)])
    return TypeAdapter(info.annotation)


def validate_sweep_value(dotted: str, adapter: TypeAdapter, value: Any) -> None:
    """Checks one listed value against the single-field rules of its parameter."""
    try:
        parsed = adapter.validate_python(value)
    except ValidationError as e:
        raise ConfigValidationError(dotted, f"value {value!r}: {e.errors()[0]['msg']}")
    if dotted in FACTOR_THREE_FIELDS or dotted in POWER_OF_TWO_FIELDS:
        allow_three = dotted in FACTOR_THREE_FIELDS
        if not is_allowed_count(parsed, allow_three):
            allowed = "a power of two or three times one" if allow_three else "a power of two"
            raise ConfigValidationError(dotted, f"value {value!r} must be {allowed}")
    if isinstance(parsed, SalpMode) and parsed.kind == SalpKind.GROUPS:
        if parsed.groups < 2 or not is_power_of_two(parsed.groups):
            raise ConfigValidationError(dotted, f"value {value!r}: group count must be a power of two >= 2")
    if isinstance(parsed, PartialPage) and parsed.kind == PartialPageKind.SUBCHANNELS:
        if parsed.count < 2 or not is_power_of_two(parsed.count):
            raise ConfigValidationError(dotted, f"value {value!r}: subchannel count must be a power of two >= 2")


def validate_sweep_parameters(parameters: Dict[str, List[Any]]) -> None:
    """
    Checks that every swept name is a configuration field and every listed value
    is valid for that field on its own. Cross-field rules stay per design point.

    Raises:
        ConfigValidationError: naming the offending parameter.
    """
    for dotted, values in parameters.items():
        adapter = _field_adapter(dotted)
        if not values:
            raise ConfigValidationError(dotted, "needs at least one value")
        for value in values:
            validate_sweep_value(dotted, adapter, value)
