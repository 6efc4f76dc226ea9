"""Process settings domain model."""
from typing import Optional
from pydantic import BaseModel, field_validator


class WorkersConfig(BaseModel):
    """Worker pool settings."""
    count: Optional[int] = None  # Override of the detected core count (RVM_WORKERS)

    @field_validator('count')
    @classmethod
    def validate_count(cls, v: Optional[int]) -> Optional[int]:
        """
        Ignores non-positive overrides.

        Args:
            v: Worker count

        Returns:
            Worker count, or None when the override is not usable
        """
        if v is None or v < 1:
            return None
        return v


class CatalogConfig(BaseModel):
    """Run catalog configuration."""
    path: str  # Path to the SQLite catalog file


class LoggerConfig(BaseModel):
    """Logger configuration."""
    name: str  # Logger name
    level: str  # Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)

    @field_validator('level')
    @classmethod
    def validate_level(cls, v: str) -> str:
        """Normalizes the level and falls back to INFO when unknown."""
        level = (v or "").upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            return "INFO"
        return level


class VerifyConfig(BaseModel):
    """Verification suite settings."""
    budget_minutes: float  # Runtime budget; exceeding it emits a warning

    @field_validator('budget_minutes')
    @classmethod
    def validate_budget(cls, v: float) -> float:
        """Budget must be positive (defaults to 10 minutes)."""
        return v if v > 0 else 10.0


class AppConfig(BaseModel):
    """Process configuration."""
    workers: Optional[WorkersConfig] = None
    catalog: Optional[CatalogConfig] = None
    logger: Optional[LoggerConfig] = None
    verify: Optional[VerifyConfig] = None
