"""Processor detection with py-cpuinfo."""
from typing import Any, Dict, Optional, Tuple

import cpuinfo

from domain.models.hardware import SIMD_EXTENSIONS, CPUInfo, CPUVendor
from domain.ports.hardware_info import HardwareInfo

# (vendor, substrings matched against vendor_id and brand)
_VENDOR_MARKERS = (
    (CPUVendor.INTEL, ("genuineintel", "intel")),
    (CPUVendor.AMD, ("authenticamd", "amd")),
)
_ARM_ARCHES = ("arm", "aarch64")


class LocalHardwareInfo(HardwareInfo):
    """Detects the local processor on first access and caches it."""

    def __init__(self):
        self._cpu_info: Optional[CPUInfo] = None

    @property
    def cpu(self) -> CPUInfo:
        if self._cpu_info is None:
            self._cpu_info = self._detect()
        return self._cpu_info

    def _detect(self) -> CPUInfo:
        """
        Reads py-cpuinfo.

        Falls back to a single-core CPUInfo when detection fails.
        """
        try:
            raw = cpuinfo.get_cpu_info()
        except Exception:
            return CPUInfo()
        arch = str(raw.get("arch", "unknown"))
        name = str(raw.get("brand_raw", "unknown"))
        return CPUInfo(
            vendor=self._vendor(arch.lower(), str(raw.get("vendor_id_raw", "")).lower(), name.lower()),
            name=name,
            arch=arch,
            cores=self._cores(raw),
            simd=self._simd(raw),
        )

    @staticmethod
    def _vendor(arch: str, vendor_id: str, name: str) -> CPUVendor:
        for vendor, markers in _VENDOR_MARKERS:
            if any(marker in vendor_id or marker in name for marker in markers):
                return vendor
        if any(marker in arch for marker in _ARM_ARCHES) or "arm" in vendor_id or "arm" in name:
            return CPUVendor.ARM
        return CPUVendor.UNKNOWN

    @staticmethod
    def _cores(raw: Dict[str, Any]) -> int:
        cores = raw.get("count", raw.get("cpu_count", 1))
        return cores if isinstance(cores, int) and cores > 0 else 1

    @staticmethod
    def _simd(raw: Dict[str, Any]) -> Tuple[str, ...]:
        flags = {str(flag).lower() for flag in raw.get("flags", ())}
        return tuple(ext for ext in SIMD_EXTENSIONS if ext in flags)
