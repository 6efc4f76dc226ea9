"""Compute resources seen by the simulator."""
from enum import Enum
from typing import Tuple

from pydantic import BaseModel, Field

# Vector extensions numpy kernels benefit from, fastest first
SIMD_EXTENSIONS = ("avx512f", "avx2", "sse4_2", "asimd", "neon")


class CPUVendor(str, Enum):
    INTEL = "intel"
    AMD = "amd"
    ARM = "arm"
    UNKNOWN = "unknown"


class CPUInfo(BaseModel):
    """Detected processor."""
    vendor: CPUVendor = CPUVendor.UNKNOWN
    name: str = "unknown"
    arch: str = "unknown"
    cores: int = Field(default=1, ge=1)  # logical cores
    simd: Tuple[str, ...] = ()  # subset of SIMD_EXTENSIONS, fastest first

    @property
    def best_simd(self) -> str:
        return self.simd[0] if self.simd else "none"

    def __str__(self) -> str:
        return f"{self.vendor.value} {self.name}, {self.cores} cores, simd {self.best_simd}"
