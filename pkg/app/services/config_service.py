"""
==========================================================
              CONFIGURATION SERVICE MODULE
==========================================================

  Loads, validates, serializes and enumerates design
  configurations.

  - Documents are JSON; unknown keys are errors
  - Bundled documents resolve by bare name
  - Sweeps enumerate row-major over the declared
    parameter order

==========================================================
"""

import copy
import hashlib
import itertools
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from app.config.settings import settings
from app.core.exceptions import ConfigValidationError, DocumentParseError
from app.schemas.config import MemoryConfig, SweepSpec
from app.services.validation import validate_memory_config

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)

PathLike = Union[str, Path]


def resolve_document(name: PathLike, directory: Path) -> Path:
    """An existing path wins; otherwise `<directory>/<name>.json`."""
    path = Path(name).expanduser()
    if path.exists():
        return path
    candidate = directory / (path.name if path.suffix == ".json" else f"{path.name}.json")
    if candidate.exists():
        return candidate
    raise DocumentParseError(path, f"no such file (also looked for {candidate})")


def read_json(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise DocumentParseError(path, "no such file")
    except json.JSONDecodeError as e:
        raise DocumentParseError(path, f"malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}")
    except OSError as e:
        raise DocumentParseError(path, str(e))


def parse_document(model: Type[ModelT], data: Any) -> ModelT:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ConfigValidationError.from_errors(e.errors())


def load_document(model: Type[ModelT], name: PathLike, directory: Path) -> ModelT:
    path = resolve_document(name, directory)
    logger.debug(f"Loading {model.__name__} from {path}")
    return parse_document(model, read_json(path))


def build_config(data: Any) -> MemoryConfig:
    """Schema plus cross-field validation of an in-memory document."""
    return validate_memory_config(parse_document(MemoryConfig, data))


def load_config(path: PathLike) -> MemoryConfig:
    """
    Loads and validates one design configuration.

    Raises:
        DocumentParseError: unreadable or malformed file.
        ConfigValidationError: a schema or structural invariant is violated.
    """
    resolved = resolve_document(path, settings.CONFIG_DIR)
    config = build_config(read_json(resolved))
    logger.info(f"Loaded config '{config.name or resolved.stem}' ({config_id(config)})")
    return config


def load_sweep(path: PathLike) -> SweepSpec:
    return load_document(SweepSpec, path, settings.SWEEP_DIR)


def derive_pumps(config: MemoryConfig) -> int:
    """Column cycles needed to deliver one atom from the MDL bits fired per cycle."""
    return config.pumps_per_atom


def serialize_config(config: MemoryConfig) -> Dict[str, Any]:
    return config.model_dump(mode="json")


def canonical_json(config: MemoryConfig) -> str:
    data = serialize_config(config)
    data.pop("name", None)
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_id(config: MemoryConfig) -> str:
    """Content hash of the canonical config; the label does not take part."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()[:16]


def set_dotted(data: Dict[str, Any], dotted: str, value: Any) -> None:
    parts = dotted.split(".")
    target = data
    for part in parts[:-1]:
        if part not in target or not isinstance(target[part], dict):
            raise ConfigValidationError(dotted, f"unknown parameter group '{part}'")
        target = target[part]
    if parts[-1] not in target:
        raise ConfigValidationError(dotted, "unknown parameter")
    target[parts[-1]] = value


def flatten_config(config: MemoryConfig) -> Dict[str, Any]:
    """Dotted scalar view used for table columns."""
    flat: Dict[str, Any] = {}
    for group in ("inter_bank", "bank", "subarray", "mat"):
        for key, value in getattr(config, group).model_dump(mode="json").items():
            flat[f"{group}.{key}"] = value
    flat["bank.salp_mode"] = config.bank.salp_mode.label()
    flat["subarray.partial_page"] = config.subarray.partial_page.label()
    return flat


@dataclass(frozen=True)
class SweepCandidate:
    """One point of the Cartesian product; `config` is None when it was rejected."""
    index: int
    config: Optional[MemoryConfig]
    reason: Optional[str] = None
    detail: Optional[str] = None


def sweep_size(spec: SweepSpec) -> int:
    if not spec.parameters:
        return 0
    size = 1
    for values in spec.parameters.values():
        size *= len(values)
    return size


def iter_sweep(spec: SweepSpec, baseline: Optional[MemoryConfig] = None) -> Iterator[SweepCandidate]:
    """
    Walks the full Cartesian product, yielding accepted and rejected points alike
    so callers can account for every index.
    """
    if not spec.parameters:
        return
    if baseline is None:
        baseline = load_config(spec.baseline)
    base = serialize_config(baseline)
    names: List[str] = list(spec.parameters.keys())
    for name in names:
        set_dotted(copy.deepcopy(base), name, None)  # rejects unknown parameters up front

    max_dies = spec.filters.max_dies
    for index, combo in enumerate(itertools.product(*(spec.parameters[name] for name in names))):
        data = copy.deepcopy(base)
        for name, value in zip(names, combo):
            set_dotted(data, name, value)
        data["name"] = ""
        try:
            config = build_config(data)
        except ConfigValidationError as e:
            yield SweepCandidate(index, None, "invalid", str(e))
            continue
        if config.dies > max_dies:
            yield SweepCandidate(index, None, "stack_height", f"{config.dies} dies exceeds {max_dies}")
            continue
        yield SweepCandidate(index, config)


def expand_sweep(spec: SweepSpec, baseline: Optional[MemoryConfig] = None) -> Iterator[MemoryConfig]:
    """Configs of the sweep that satisfy every structural invariant and the stack-height filter."""
    for candidate in iter_sweep(spec, baseline):
        if candidate.config is not None:
            yield candidate.config
