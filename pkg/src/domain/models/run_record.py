"""Run catalog domain model."""
from datetime import datetime
from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field


class RunStatus(str, Enum):
    """Possible states of a run directory."""
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    ANALYZED = "analyzed"


class RunRecord(BaseModel):
    """Catalog entry of one run directory."""
    run_dir: str = Field(..., description="Absolute path of the run directory")
    config_digest: str = Field(..., description="SHA-256 of the serialized run configuration")
    seed: int = Field(..., description="Sampling seed")
    status: RunStatus = Field(default=RunStatus.PENDING, description="Run status")
    error_message: Optional[str] = Field(default=None, description="Error message if failed")
    created_at: datetime = Field(default_factory=datetime.now, description="Creation timestamp")
    updated_at: datetime = Field(default_factory=datetime.now, description="Last update timestamp")

    def mark_as_running(self) -> "RunRecord":
        """Marks the run as running."""
        return self.model_copy(update={"status": RunStatus.RUNNING, "error_message": None,
                                       "updated_at": datetime.now()})

    def mark_as_completed(self) -> "RunRecord":
        """Marks the run as completed."""
        return self.model_copy(update={"status": RunStatus.COMPLETED, "updated_at": datetime.now()})

    def mark_as_analyzed(self) -> "RunRecord":
        """Marks the run as analyzed."""
        return self.model_copy(update={"status": RunStatus.ANALYZED, "updated_at": datetime.now()})

    def mark_as_failed(self, error_message: str) -> "RunRecord":
        """Marks the run as failed."""
        return self.model_copy(update={
            "status": RunStatus.FAILED,
            "error_message": error_message,
            "updated_at": datetime.now()
        })

    @property
    def is_analyzable(self) -> bool:
        return self.status in (RunStatus.COMPLETED, RunStatus.ANALYZED)
