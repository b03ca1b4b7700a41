# tests/conftest.py

import pytest

from app.schemas.config import MemoryConfig
from app.schemas.technode import TechnologyNode
from app.services.config_service import load_config, serialize_config
from app.services.evaluator import DesignEvaluator
from app.services.technode_service import load_node, resolve_node


@pytest.fixture(scope="session")
def unscaled_node() -> TechnologyNode:
    """The bundled 2ynm node, unscaled."""
    return load_node("2ynm")


@pytest.fixture(scope="session")
def node_1znm() -> TechnologyNode:
    """HBM3-generation node."""
    return resolve_node("2ynm", "1znm_scaling")


@pytest.fixture(scope="session")
def node_1ynm() -> TechnologyNode:
    """HBM2E-generation node."""
    return resolve_node("2ynm", "1ynm_scaling")


@pytest.fixture(scope="session")
def hbm3() -> MemoryConfig:
    return load_config("hbm3_baseline")


@pytest.fixture(scope="session")
def hbm2e() -> MemoryConfig:
    return load_config("hbm2e")


@pytest.fixture(scope="session")
def evaluator(node_1znm, hbm3) -> DesignEvaluator:
    """Evaluator on 1znm with the HBM3 baseline as timing reference and tier anchor."""
    return DesignEvaluator(node_1znm, reference=hbm3, baseline=hbm3)


@pytest.fixture
def hbm3_data(hbm3) -> dict:
    """Mutable JSON form of the HBM3 baseline."""
    return serialize_config(hbm3)
