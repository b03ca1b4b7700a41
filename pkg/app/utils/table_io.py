# app/utils/table_io.py

"""
==========================================================
                    METRICS TABLE I/O
==========================================================

  Metrics tables are CSV with one leading comment line
  carrying the schema version:

      # stack-dram-explorer metrics schema 1

  followed by the header row. Columns are the metric
  fields in DesignMetrics order, then the flattened
  config fields (`group.field`).

==========================================================
"""

import json
import logging
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import pandas as pd

from app.config.settings import settings
from app.core.exceptions import DocumentParseError
from app.models.results import DesignMetrics

logger = logging.getLogger(__name__)

SCHEMA_PREFIX = "# stack-dram-explorer metrics schema"

METRIC_COLUMNS: List[str] = [f.name for f in fields(DesignMetrics)]

PathLike = Union[str, Path]


def schema_line(version: Optional[str] = None) -> str:
    return f"{SCHEMA_PREFIX} {version or settings.CSV_SCHEMA_VERSION}"


def metrics_frame(rows: Iterable[Dict[str, Any]]) -> pd.DataFrame:
    """Frame with metric columns first, config columns after, in stable order."""
    frame = pd.DataFrame(list(rows))
    if frame.empty:
        return pd.DataFrame(columns=METRIC_COLUMNS)
    extra = [column for column in frame.columns if column not in METRIC_COLUMNS]
    return frame[[column for column in METRIC_COLUMNS if column in frame.columns] + extra]


def _ensure_parent(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_table(frame: pd.DataFrame, path: PathLike) -> Path:
    path = _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(schema_line() + "\n")
        frame.to_csv(handle, index=False, float_format="%.10g")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def read_table(path: PathLike) -> pd.DataFrame:
    """
    Reads a metrics table written by `write_table`; the schema line is optional.

    Raises:
        DocumentParseError: missing or unreadable file.
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            first = handle.readline()
            if not first.startswith("#"):
                handle.seek(0)
            elif not first.startswith(SCHEMA_PREFIX):
                logger.warning(f"{path}: unrecognised comment header '{first.strip()}'")
            return pd.read_csv(handle, dtype={"config_id": str})
    except FileNotFoundError:
        raise DocumentParseError(path, "no such file")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DocumentParseError(path, str(e))


def write_jsonl(records: Iterable[Dict[str, Any]], path: PathLike) -> Path:
    path = _ensure_parent(path)
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
            count += 1
    logger.debug(f"Wrote {count} records to {path}")
    return path


def write_json(data: Any, path: PathLike) -> Path:
    path = _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path
