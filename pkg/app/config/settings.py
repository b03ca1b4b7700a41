# app/config/settings.py

import logging
import os
from pathlib import Path
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)

PACKAGE_ROOT = Path(__file__).resolve().parent.parent
BUNDLED_DATA = PACKAGE_ROOT / "data"


class Settings(BaseSettings):
    """
    Global toolkit settings, loaded from environment variables (or a `.env` file).
    """

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    # General Application Settings
    ENV: str = Field("development")
    HOST: str = Field("0.0.0.0")
    PORT: int = Field(8000)
    DEBUG: bool = Field(True)

    # Logging Settings
    LOG_LEVEL: str = Field("INFO")

    # Bundled Document Locations
    DRAM_NODE_DIR: Path = Field(BUNDLED_DATA / "nodes")
    CONFIG_DIR: Path = Field(BUNDLED_DATA / "configs")
    SWEEP_DIR: Path = Field(BUNDLED_DATA / "sweeps")
    TARGET_DIR: Path = Field(BUNDLED_DATA / "targets")
    CASE_STUDY_DIR: Path = Field(BUNDLED_DATA / "case_studies")

    # Technology Defaults
    DEFAULT_CONFIG: str = Field("hbm3_baseline")
    DEFAULT_NODE: str = Field("2ynm")
    DEFAULT_NODE_SCALING: Optional[str] = Field("1znm_scaling")

    # Sweep Engine
    SWEEP_JOBS: int = Field(default_factory=lambda: os.cpu_count() or 1)
    SWEEP_CHUNK_SIZE: int = Field(64)
    MAX_DIES: int = Field(16)
    MAX_DIE_LEN_MM: float = Field(13.0)
    MAX_DIE_WIDTH_MM: float = Field(13.0)

    # Hull Estimation
    HULL_SAMPLES: int = Field(200_000)
    HULL_SEED: int = Field(2024)
    HULL_CHUNK_SIZE: int = Field(20_000)

    # Output
    CSV_SCHEMA_VERSION: str = Field("1")

    @field_validator("LOG_LEVEL")
    def validate_log_level(cls, v: str) -> str:
        level = v.upper()
        if not isinstance(logging.getLevelName(level), int):
            logger.warning(f"Unknown LOG_LEVEL '{v}', falling back to INFO.")
            return "INFO"
        return level

    @field_validator("DRAM_NODE_DIR", "CONFIG_DIR", "SWEEP_DIR", "TARGET_DIR", "CASE_STUDY_DIR")
    def resolve_directory(cls, v: Path) -> Path:
        """Relative directories are taken against the package root."""
        path = Path(v).expanduser()
        if not path.is_absolute():
            path = PACKAGE_ROOT / path
        return path

    @field_validator("SWEEP_JOBS")
    def validate_jobs(cls, v: int) -> int:
        return max(1, v)


# Create a global settings instance to be imported throughout the toolkit
settings = Settings()
