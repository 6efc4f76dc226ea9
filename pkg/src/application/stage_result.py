"""Result model shared by the pipeline stages."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional


class StageStatus(str, Enum):
    """Outcome of a pipeline stage."""
    SUCCESS = "success"
    FAILED = "failed"
    CONFIG_ERROR = "config_error"


@dataclass
class StageResult:
    """Result of one run, analyze, verify or oracle stage."""
    stage: str
    status: StageStatus = StageStatus.SUCCESS
    output: Optional[str] = None
    message: str = ""
    details: Dict[str, Any] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)

    @property
    def is_success(self) -> bool:
        """
        Checks if the stage was successful.

        Returns:
            True if the stage succeeded, False otherwise
        """
        return self.status == StageStatus.SUCCESS

    @property
    def exit_code(self) -> int:
        """0 on success, 2 for configuration errors, 1 for any other failure."""
        if self.status == StageStatus.SUCCESS:
            return 0
        if self.status == StageStatus.CONFIG_ERROR:
            return 2
        return 1

    def __str__(self) -> str:
        """String representation of the result."""
        text = f"{self.stage}: {self.status.value}"
        if self.output:
            text += f", output: {self.output}"
        if self.message:
            text += f", {self.message}"
        return text
