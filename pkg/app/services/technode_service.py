"""
==========================================================
             TECHNOLOGY NODE SERVICE MODULE
==========================================================

  Loads node documents and derives a scaled node.

  A scalable parameter p of dimension d in category k
  becomes p * (1 + conf_k * (ideal_d - 1)), where ideal_d
  is the dimensional ideal for the feature ratio r:

  - length:          r
  - area:            r^2
  - capacitance:     r
  - cap_per_length:  1
  - fixed:           1

==========================================================
"""

import copy
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Type, Union, get_origin

from pydantic import BaseModel

from app.config.settings import settings
from app.core.exceptions import NodeScalingError
from app.schemas.technode import NodeScaling, ScalingConfidence, TechnologyNode
from app.services.config_service import load_document, parse_document

logger = logging.getLogger(__name__)


def ideal_scale(dim: str, ratio: float) -> float:
    if dim in ("length", "capacitance"):
        return ratio
    if dim == "area":
        return ratio * ratio
    if dim in ("cap_per_length", "fixed"):
        return 1.0
    raise NodeScalingError(f"Unknown dimension kind '{dim}'")


def scale_factor(dim: str, category: Optional[str], ratio: float, conf: ScalingConfidence) -> float:
    ideal = ideal_scale(dim, ratio)
    if ideal == 1.0 or category is None:
        return 1.0
    return 1.0 + conf.for_category(category) * (ideal - 1.0)


def _scale_model(model_cls: Type[BaseModel], data: Dict[str, Any], ratio: float, conf: ScalingConfidence) -> None:
    """Scales `data` (a dump of `model_cls`) in place, following field tags."""
    for name, info in model_cls.model_fields.items():
        value = data.get(name)
        if value is None:
            continue
        extra = info.json_schema_extra if isinstance(info.json_schema_extra, dict) else None
        if extra is not None and isinstance(value, (int, float)) and not isinstance(value, bool):
            factor = scale_factor(extra["dim"], extra.get("category"), ratio, conf)
            if factor != 1.0:
                data[name] = value * factor
            continue
        nested = _nested_model(info.annotation)
        if nested is None or not isinstance(value, dict):
            continue
        if get_origin(info.annotation) is dict:
            for entry in value.values():
                _scale_model(nested, entry, ratio, conf)
        else:
            _scale_model(nested, value, ratio, conf)


def _nested_model(annotation: Any) -> Optional[Type[BaseModel]]:
    if isinstance(annotation, type) and issubclass(annotation, BaseModel):
        return annotation
    for arg in getattr(annotation, "__args__", ()) or ():
        found = _nested_model(arg)
        if found is not None:
            return found
    return None


def apply_overrides(data: Dict[str, Any], overrides: Dict[str, Any]) -> None:
    for dotted, value in overrides.items():
        parts = dotted.split(".")
        target = data
        for part in parts[:-1]:
            if not isinstance(target, dict) or part not in target:
                raise NodeScalingError(f"Override '{dotted}' names an unknown node field")
            target = target[part]
        if not isinstance(target, dict) or parts[-1] not in target:
            raise NodeScalingError(f"Override '{dotted}' names an unknown node field")
        target[parts[-1]] = value


def scale_node(
    unscaled: TechnologyNode,
    target_feature_ratio: float,
    conf: ScalingConfidence,
    overrides: Optional[Dict[str, Any]] = None,
    name: Optional[str] = None,
) -> TechnologyNode:
    """
    Derives a node at `target_feature_ratio` times the unscaled feature size.

    Raises:
        NodeScalingError: non-positive ratio or an override naming an unknown field.
    """
    if target_feature_ratio <= 0:
        raise NodeScalingError(f"Feature ratio must be positive, got {target_feature_ratio}")
    data = copy.deepcopy(unscaled.model_dump(mode="json"))
    _scale_model(TechnologyNode, data, target_feature_ratio, conf)
    if overrides:
        apply_overrides(data, overrides)
    if name:
        data["name"] = name
    return parse_document(TechnologyNode, data)


def load_node(path: Union[str, Path]) -> TechnologyNode:
    return load_document(TechnologyNode, path, settings.DRAM_NODE_DIR)


def load_node_scaling(path: Union[str, Path]) -> NodeScaling:
    return load_document(NodeScaling, path, settings.DRAM_NODE_DIR)


def apply_scaling(unscaled: TechnologyNode, scaling: NodeScaling) -> TechnologyNode:
    node = scale_node(unscaled, scaling.feature_ratio, scaling.confidence, scaling.overrides, scaling.name)
    logger.info(f"Scaled node {unscaled.name} -> {node.name} (ratio {scaling.feature_ratio})")
    return node


def resolve_node(
    node: Union[str, Path, None] = None,
    scaling: Union[str, Path, None] = None,
    use_default_scaling: bool = True,
) -> TechnologyNode:
    """
    Node used for evaluation: the unscaled node, scaled when a scaling document is
    given (or configured as the default).
    """
    unscaled = load_node(node or settings.DEFAULT_NODE)
    scaling_name = scaling if scaling is not None else (settings.DEFAULT_NODE_SCALING if use_default_scaling else None)
    if not scaling_name:
        return unscaled
    return apply_scaling(unscaled, load_node_scaling(scaling_name))
