"""
==========================================================
              STACKED DRAM EXPLORER - ERRORS
==========================================================

  Exception hierarchy shared by the model services, the
  CLI and the HTTP router.

  - Input errors (parse, validation, unknown names) map to
    CLI exit code 2 and HTTP 400
  - Routing infeasibility is a property of a design, not of
    the input file; sweeps record it as a skipped design

==========================================================
"""

from pathlib import Path
from typing import Iterable, Optional, Union


class DramModelError(Exception):
    """Base exception for every modeling error."""
    pass


class DocumentParseError(DramModelError):
    """A JSON document could not be read or decoded."""

    def __init__(self, path: Union[str, Path], reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"Cannot parse '{self.path}': {reason}")


class ConfigValidationError(DramModelError):
    """A configuration or document violates an invariant."""

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")

    @classmethod
    def from_errors(cls, errors: Iterable[dict]) -> "ConfigValidationError":
        """Build from pydantic's `errors()` list, joining `loc -> msg` entries."""
        entries = []
        first_field = "document"
        for error in errors:
            loc = " -> ".join(str(part) for part in error.get("loc", ())) or "document"
            if not entries:
                first_field = loc
            entries.append(f"{loc}: {error.get('msg', 'invalid value')}")
        err = cls(first_field, "; ".join(entries))
        err.args = ("; ".join(entries),)
        return err


class RoutingInfeasibleError(DramModelError):
    """Wires demanded over a MAT region exceed the available routing span."""

    def __init__(
        self,
        region: str,
        demand_um: float,
        available_um: float,
        detail: Optional[str] = None,
        unit: str = "um",
    ):
        self.region = region
        self.demand_um = demand_um
        self.available_um = available_um
        message = (
            f"routing infeasible over {region}: demand {demand_um:.3f} {unit} "
            f"exceeds available {available_um:.3f} {unit}"
        )
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class NodeScalingError(DramModelError):
    """Invalid technology-node scaling request."""
    pass


class UnknownMetricError(DramModelError):
    """A metric name is not a column of the metrics table."""

    def __init__(self, name: str, known: Iterable[str]):
        self.name = name
        super().__init__(f"Unknown metric '{name}'. Valid options: {', '.join(sorted(known))}.")


class AnalysisError(DramModelError):
    """Post-processing cannot be performed on the given table."""
    pass
