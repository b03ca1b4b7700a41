"""
==========================================================
          STACKED DRAM EXPLORER - BUNDLED CATALOG
==========================================================

  Lists the bundled documents and checks, once per
  process, that the default config and node load.

  - Used by the HTTP app on startup and by the bare CLI
  - A broken default raises before any request is served

==========================================================
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from app.config.settings import settings
from app.services.config_service import load_config
from app.services.technode_service import resolve_node

logger = logging.getLogger(__name__)


@dataclass
class BundledCatalog:
    configs: List[str] = field(default_factory=list)
    nodes: List[str] = field(default_factory=list)
    sweeps: List[str] = field(default_factory=list)
    targets: List[str] = field(default_factory=list)
    case_studies: List[str] = field(default_factory=list)


_catalog: Optional[BundledCatalog] = None


def _names(directory: Path) -> List[str]:
    if not directory.is_dir():
        logger.warning(f"Bundled directory {directory} is missing")
        return []
    return sorted(path.stem for path in directory.glob("*.json"))


def load_initial_data(check_defaults: bool = True) -> BundledCatalog:
    """
    Builds the catalog; with `check_defaults` the default config is evaluated
    far enough to prove it parses and validates on the default node.

    Raises:
        DramModelError: the default config or node is broken.
    """
    global _catalog
    if _catalog is not None:
        return _catalog

    catalog = BundledCatalog(
        configs=_names(settings.CONFIG_DIR),
        nodes=_names(settings.DRAM_NODE_DIR),
        sweeps=_names(settings.SWEEP_DIR),
        targets=_names(settings.TARGET_DIR),
        case_studies=_names(settings.CASE_STUDY_DIR),
    )
    if check_defaults:
        load_config(settings.DEFAULT_CONFIG)
        resolve_node()
    logger.info(f"Catalog: {len(catalog.configs)} configs, {len(catalog.nodes)} node documents")
    _catalog = catalog
    return catalog
