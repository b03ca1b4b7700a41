# app/schemas/analysis.py

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ValidationTarget(_Document):
    """
    Expected metrics of one bundled design. Only metrics named in `expected` are
    checked; `reported` holds vendor figures shown beside the model value.
    `advisory` metrics are checked and shown but do not decide the result.
    """
    name: str
    config_path: str = Field(..., description="Config name or path")
    node: Optional[str] = Field(None, description="Node name or path; settings default when omitted")
    node_scaling: Optional[str] = Field(None, description="Scaling document; settings default when omitted")
    expected: Dict[str, float]
    tolerances: Dict[str, float] = Field(default_factory=dict, description="Relative tolerance per metric")
    reported: Dict[str, float] = Field(default_factory=dict)
    advisory: List[str] = Field(default_factory=list, description="Expected metrics that do not gate the result")

    @model_validator(mode="after")
    def check_tolerances(self) -> "ValidationTarget":
        for metric, tolerance in self.tolerances.items():
            if metric not in self.expected:
                raise ValueError(f"tolerance given for unchecked metric '{metric}'")
            if tolerance < 0:
                raise ValueError(f"tolerance for '{metric}' must be >= 0")
        for metric in self.advisory:
            if metric not in self.expected:
                raise ValueError(f"advisory metric '{metric}' has no expected value")
        return self

    def tolerance(self, metric: str, default: float = 0.01) -> float:
        return self.tolerances.get(metric, default)


class TargetSuite(_Document):
    name: str = ""
    description: Optional[str] = None
    targets: List[ValidationTarget]


class Constraint(_Document):
    """`metric relation ratio * baseline`, e.g. power_w <= 1.0 x baseline."""
    metric: str
    relation: Literal[">=", "<="]
    ratio: float = Field(1.0, gt=0)

    def bound(self, baseline_value: float) -> float:
        return self.ratio * baseline_value

    def label(self) -> str:
        return f"{self.metric} {self.relation} {self.ratio:g}x baseline"


class CaseStudy(_Document):
    name: str = ""
    description: Optional[str] = None
    baseline: str = Field("hbm3_baseline", description="Config whose row anchors the constraints")
    constraints: List[Constraint] = Field(default_factory=list)


class Scenario(_Document):
    """Application scenario: a primary metric pair, a colour metric and an optional capacity floor."""
    name: str
    description: str = ""
    x: str
    y: str
    color: str
    min_capacity_gb: Optional[float] = Field(None, gt=0)
