"""Application configuration using Pydantic Settings."""

import logging
import os
from pathlib import Path
from typing import Literal

import structlog
from pydantic import Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.utils.exceptions import ConfigurationError


class Settings(BaseSettings):
    """Strongly-typed application settings."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Data
    database_root: Path | None = Field(
        default=None, description="Default database directory when --db is omitted"
    )

    # Reproducibility / execution
    default_seed: int = Field(default=42, ge=0)
    jobs: int | None = Field(default=None, ge=1, le=256, description="Worker count (None = cores)")

    # R-peak detector
    band_low_hz: float = Field(default=5.0, gt=0.0)
    band_high_hz: float = Field(default=15.0, gt=0.0)
    integration_window_ms: float = Field(default=150.0, gt=0.0)
    refractory_ms: float = Field(default=200.0, gt=0.0)
    threshold_decay: float = Field(default=0.125, gt=0.0, lt=1.0)

    # Beat windows and fragments
    pre_span_ms: float = Field(default=250.0, ge=250.0)
    post_span_ms: float = Field(default=420.0, ge=420.0)
    fragment_len: int = Field(default=20, ge=1, le=200)
    standardize: bool = True

    # Statistics
    permutations: int = Field(default=10_000, ge=100, le=1_000_000)

    # ECGRDVQ clinical table
    drug_metadata_file: str = "SCR-003.Clinical.Data.csv"
    drug_subject_column: str = "RANDID"
    drug_record_column: str = "EGREFID"
    drug_timepoint_column: str = "TPT"
    drug_arm_column: str = "EXTRT"

    # Logging
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    @model_validator(mode="after")
    def _check_band(self) -> "Settings":
        if self.band_low_hz >= self.band_high_hz:
            raise ValueError("band_low_hz must be below band_high_hz")
        return self

    def require_database_root(self) -> Path:
        """Get the default database root, failing if it is not configured."""
        if self.database_root is None:
            raise ConfigurationError("DATABASE_ROOT not set and no --db given")
        return self.database_root

    @property
    def effective_jobs(self) -> int:
        """Worker count with the 'available cores' default resolved."""
        return self.jobs or os.cpu_count() or 1


def get_settings() -> Settings:
    """Factory function to get settings (allows mocking in tests)."""
    return Settings()


def configure_logging(settings: Settings) -> None:
    """Configure structured logging to standard error with the configured level."""
    logging.basicConfig(
        level=getattr(logging, settings.log_level),
        format="%(message)s",
    )

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.JSONRenderer(),
        ],
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
    )


# Singleton for easy import
settings = get_settings()
