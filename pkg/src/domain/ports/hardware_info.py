"""Port for hardware information."""
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from domain.models.hardware import CPUInfo

# Each deposition worker holds a private copy of the charge and current grids
MAX_DEFAULT_WORKERS = 16


class HardwareInfo(ABC):
    """
    Interface for hardware information.

    Implementations should detect hardware lazily and cache results.
    """

    @property
    @abstractmethod
    def cpu(self) -> "CPUInfo":
        """
        Gets CPU information.

        Returns:
            CPUInfo with vendor, name, architecture, logical cores and SIMD extensions
        """
        pass

    @property
    def default_workers(self) -> int:
        """Worker count used when neither the run file nor RVM_WORKERS sets one."""
        return max(1, min(self.cpu.cores, MAX_DEFAULT_WORKERS))
