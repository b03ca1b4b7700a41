"""
==========================================================
                 MODEL REPLICATION SERVICE
==========================================================

  Evaluates bundled designs against expected metrics.

  Each target names a config, a node and an optional
  scaling document; every expected metric is checked
  against a relative tolerance.

==========================================================
"""

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from app.config.settings import settings
from app.schemas.analysis import CaseStudy, TargetSuite, ValidationTarget
from app.services.config_service import load_config, load_document
from app.services.evaluator import DesignEvaluator
from app.services.technode_service import resolve_node

logger = logging.getLogger(__name__)


@dataclass
class MetricCheck:
    metric: str
    expected: float
    actual: float
    tolerance: float
    reported: Optional[float] = None
    advisory: bool = False

    @property
    def relative_error(self) -> float:
        if self.expected == 0:
            return abs(self.actual)
        return abs(self.actual - self.expected) / abs(self.expected)

    @property
    def passed(self) -> bool:
        return self.relative_error <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["relative_error"] = self.relative_error
        data["passed"] = self.passed
        return data


@dataclass
class TargetResult:
    name: str
    config_id: str
    node: str
    checks: List[MetricCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks if not check.advisory)

    @property
    def advisories(self) -> List[MetricCheck]:
        """Advisory checks that fall outside their tolerance."""
        return [check for check in self.checks if check.advisory and not check.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "config_id": self.config_id,
            "node": self.node,
            "passed": self.passed,
            "checks": [check.to_dict() for check in self.checks],
        }


def load_target_suite(path: Union[str, Path]) -> TargetSuite:
    return load_document(TargetSuite, path, settings.TARGET_DIR)


def load_case_study(path: Union[str, Path]) -> CaseStudy:
    return load_document(CaseStudy, path, settings.CASE_STUDY_DIR)


def check_target(target: ValidationTarget) -> TargetResult:
    """
    Raises:
        DramModelError: the target's documents are missing or invalid, or the
            design cannot be routed.
    """
    node = resolve_node(target.node, target.node_scaling)
    config = load_config(target.config_path)
    metrics = DesignEvaluator(node).evaluate(config).to_dict()

    result = TargetResult(name=target.name, config_id=metrics["config_id"], node=node.name)
    for metric, expected in target.expected.items():
        result.checks.append(
            MetricCheck(
                metric=metric,
                expected=expected,
                actual=float(metrics[metric]),
                tolerance=target.tolerance(metric),
                reported=target.reported.get(metric),
                advisory=metric in target.advisory,
            )
        )
    failed = [check.metric for check in result.checks if not check.passed and not check.advisory]
    for check in result.advisories:
        logger.info(
            f"Target {target.name}: advisory {check.metric} at {check.actual:.4g} vs {check.expected:.4g} "
            f"({check.relative_error:.1%} off)"
        )
    if failed:
        logger.warning(f"Target {target.name} off on: {', '.join(failed)}")
    else:
        logger.info(f"Target {target.name} within tolerance on {len(result.checks)} metrics")
    return result


def run_suite(suite: TargetSuite) -> List[TargetResult]:
    return [check_target(target) for target in suite.targets]
