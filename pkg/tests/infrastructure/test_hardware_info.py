"""Tests for local hardware info."""
from unittest.mock import patch

import pytest

from domain.models.hardware import CPUInfo, CPUVendor
from domain.ports.hardware_info import MAX_DEFAULT_WORKERS
from infrastructure.hardware.local_hardware_info import LocalHardwareInfo

CPUINFO = 'infrastructure.hardware.local_hardware_info.cpuinfo.get_cpu_info'


class TestLocalHardwareInfo:
    """Tests for LocalHardwareInfo."""

    @patch(CPUINFO)
    def test_init_no_side_effects(self, mock_cpuinfo):
        """Test that __init__ does not trigger detection (lazy initialization)."""
        hw_info = LocalHardwareInfo()

        assert hw_info._cpu_info is None
        mock_cpuinfo.assert_not_called()

    @patch(CPUINFO)
    def test_cpu_property_caches(self, mock_cpuinfo):
        """Test that cpu property detects once and caches the result."""
        mock_cpuinfo.return_value = {'vendor_id_raw': 'GenuineIntel', 'brand_raw': 'Intel Xeon', 'arch': 'X86_64',
                                     'count': 8, 'flags': ['sse4_2', 'avx2', 'fma']}
        hw_info = LocalHardwareInfo()

        cpu1 = hw_info.cpu
        cpu2 = hw_info.cpu

        assert cpu1 is cpu2
        assert mock_cpuinfo.call_count == 1
        assert cpu1.vendor == CPUVendor.INTEL
        assert cpu1.cores == 8
        assert cpu1.simd == ("avx2", "sse4_2")

    @pytest.mark.parametrize("raw,vendor", [
        ({'vendor_id_raw': 'AuthenticAMD', 'brand_raw': 'AMD Ryzen', 'arch': 'X86_64'}, CPUVendor.AMD),
        ({'vendor_id_raw': '', 'brand_raw': 'Cortex', 'arch': 'ARM_8'}, CPUVendor.ARM),
        ({'vendor_id_raw': 'Other', 'brand_raw': 'Other', 'arch': 'riscv'}, CPUVendor.UNKNOWN),
    ])
    def test_vendors(self, raw, vendor):
        """Test vendor detection."""
        with patch(CPUINFO, return_value=raw):
            assert LocalHardwareInfo().cpu.vendor == vendor

    @patch(CPUINFO)
    def test_invalid_core_count(self, mock_cpuinfo):
        """Test that a missing or invalid core count gives one core."""
        mock_cpuinfo.return_value = {'arch': 'X86_64', 'count': 0}

        assert LocalHardwareInfo().cpu.cores == 1

    @patch(CPUINFO)
    def test_detection_failure(self, mock_cpuinfo):
        """Test that a failing detection falls back to a single-core CPUInfo."""
        mock_cpuinfo.side_effect = RuntimeError("no cpuinfo")

        assert LocalHardwareInfo().cpu == CPUInfo()

    @patch(CPUINFO)
    def test_default_workers(self, mock_cpuinfo):
        """Test that the default worker count is the core count, capped."""
        mock_cpuinfo.return_value = {'arch': 'X86_64', 'count': 6}
        assert LocalHardwareInfo().default_workers == 6

        mock_cpuinfo.return_value = {'arch': 'X86_64', 'count': 128}
        assert LocalHardwareInfo().default_workers == MAX_DEFAULT_WORKERS


class TestCPUInfo:
    """Tests for CPUInfo model."""

    def test_str(self):
        """Test the human-readable representation."""
        cpu = CPUInfo(vendor=CPUVendor.AMD, name="Ryzen", arch="X86_64", cores=16, simd=("avx2",))

        assert str(cpu) == "amd Ryzen, 16 cores, simd avx2"
        assert CPUInfo().best_simd == "none"
