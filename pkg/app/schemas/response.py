# app/schemas/response.py

from typing import Any, Dict, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.config import MemoryConfig


class ErrorDetail(BaseModel):
    """Error body of the response envelope."""
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "code": "ROUTING_INFEASIBLE",
                "message": "routing infeasible over LWD: demand 9.600 um exceeds available 6.000 um",
                "details": {"region": "LWD"},
                "timestamp": "2026-01-31T15:35:38.485514Z",
            }
        }
    )

    code: str = Field(..., description="Machine-readable error code")
    message: str = Field(..., description="Human-readable error message")
    details: Optional[Dict[str, Any]] = Field(None, description="Additional error context")
    timestamp: str = Field(..., description="Error timestamp in ISO format")


class APIResponse(BaseModel):
    """Standard response envelope."""
    success: bool = Field(..., description="Operation success status")
    data: Optional[Any] = Field(None, description="Response data")
    error: Optional[Union[ErrorDetail, Dict[str, Any]]] = Field(None, description="Error information if failed")
    metadata: Dict[str, Any] = Field(default_factory=dict, description="Response metadata")


class EvaluateRequest(BaseModel):
    """Body of POST /api/v1/designs/evaluate."""
    model_config = ConfigDict(extra="forbid")

    config: MemoryConfig
    node: Optional[str] = Field(None, description="Bundled node name; settings default when omitted")
    node_scaling: Optional[str] = Field(None, description="Bundled scaling document; settings default when omitted")
    include_breakdown: bool = Field(False, description="Add the energy breakdown and datapath stages")
