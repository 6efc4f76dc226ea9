"""Port for the run catalog."""
from abc import ABC, abstractmethod
from typing import List, Optional

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from domain.models.run_record import RunRecord


class RunCatalog(ABC):
    """Interface for the catalog of run directories."""

    @abstractmethod
    def find_by_run_dir(self, run_dir: str) -> Optional["RunRecord"]:
        """
        Finds the record of a run directory.

        Args:
            run_dir: Absolute path of the run directory

        Returns:
            RunRecord if found, None otherwise
        """
        pass

    @abstractmethod
    def save(self, record: "RunRecord") -> "RunRecord":
        """
        Saves or updates a run record.

        Args:
            record: Record to save

        Returns:
            Saved record
        """
        pass

    @abstractmethod
    def list_runs(self) -> List["RunRecord"]:
        """
        Lists every catalogued run, oldest first.

        Returns:
            List of run records
        """
        pass
