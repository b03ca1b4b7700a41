# app/routers/designs.py

"""
==========================================================
                  DESIGNS ROUTER MODULE
==========================================================

  HTTP surface over the evaluator:

      GET  /baseline   metrics of the default config
      POST /evaluate   metrics of a posted config

  Every response uses the APIResponse envelope. Input
  errors are 400, infeasible designs 422.

==========================================================
"""

import logging
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional

from fastapi import APIRouter, status
from fastapi.responses import JSONResponse

from app.config.settings import settings
from app.core.exceptions import ConfigValidationError, DramModelError, RoutingInfeasibleError
from app.schemas.response import APIResponse, ErrorDetail, EvaluateRequest
from app.services.config_service import load_config, serialize_config
from app.services.evaluator import DesignEvaluator
from app.services.technode_service import resolve_node
from app.services.validation import validate_memory_config

router = APIRouter()
logger = logging.getLogger(__name__)


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


def create_error_response(
    status_code: int, code: str, message: str, details: Optional[Dict[str, Any]] = None
) -> JSONResponse:
    return JSONResponse(
        status_code=status_code,
        content=APIResponse(
            success=False,
            error=ErrorDetail(code=code, message=message, details=details, timestamp=_timestamp()),
        ).model_dump(),
    )


def create_success_response(data: Any, metadata: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return APIResponse(success=True, data=data, metadata=metadata or {}).model_dump()


def error_response_for(error: DramModelError) -> JSONResponse:
    if isinstance(error, RoutingInfeasibleError):
        return create_error_response(
            status.HTTP_422_UNPROCESSABLE_ENTITY,
            "ROUTING_INFEASIBLE",
            str(error),
            details={
                "region": error.region,
                "demand_um": error.demand_um,
                "available_um": error.available_um,
            },
        )
    details = {"field": error.field} if isinstance(error, ConfigValidationError) else None
    return create_error_response(status.HTTP_400_BAD_REQUEST, "INVALID_INPUT", str(error), details=details)


def bundled_node_document(field: str, name: Optional[str]) -> Optional[Path]:
    """
    A node or scaling name from a request, as a file in the bundled node directory.
    Request bodies never reach other paths.

    Raises:
        ConfigValidationError: the name is a path or names no bundled document.
    """
    if name is None:
        return None
    directory = settings.DRAM_NODE_DIR.resolve()
    candidate = (directory / (name if name.endswith(".json") else f"{name}.json")).resolve()
    if Path(name).name != name or candidate.parent != directory or not candidate.is_file():
        raise ConfigValidationError(field, f"'{name}' is not a bundled node document")
    return candidate


@lru_cache(maxsize=8)
def get_evaluator(node: Optional[Path], node_scaling: Optional[Path]) -> DesignEvaluator:
    """One evaluator per node so the timing reference is computed once."""
    return DesignEvaluator(resolve_node(node, node_scaling))


def _evaluate(request: EvaluateRequest) -> Dict[str, Any]:
    evaluator = get_evaluator(
        bundled_node_document("node", request.node),
        bundled_node_document("node_scaling", request.node_scaling),
    )
    config = validate_memory_config(request.config)
    report = evaluator.report(config)
    data: Dict[str, Any] = {"metrics": report.metrics.to_dict()}
    if request.include_breakdown:
        data["energy"] = report.energy.to_dict()
        data["stages"] = [stage.to_dict() for stage in report.stages]
    return data


@router.get("/baseline", response_model=APIResponse, summary="Metrics of the default design")
async def get_baseline():
    try:
        config = load_config(settings.DEFAULT_CONFIG)
        data = _evaluate(EvaluateRequest(config=config))
        data["config"] = serialize_config(config)
        return create_success_response(data, metadata={"config": settings.DEFAULT_CONFIG})
    except DramModelError as e:
        logger.error(f"Baseline evaluation failed: {e}")
        return error_response_for(e)


@router.post("/evaluate", response_model=APIResponse, summary="Evaluate one design")
async def evaluate_design(request: EvaluateRequest):
    try:
        data = _evaluate(request)
        logger.info(f"Evaluated {data['metrics']['config_id']}")
        return create_success_response(
            data,
            metadata={
                "node": request.node or settings.DEFAULT_NODE,
                "node_scaling": request.node_scaling or settings.DEFAULT_NODE_SCALING,
            },
        )
    except DramModelError as e:
        logger.warning(f"Evaluation rejected: {e}")
        return error_response_for(e)
