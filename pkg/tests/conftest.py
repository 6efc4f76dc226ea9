"""Pytest configuration and shared fixtures."""
import os
import sys
import tempfile
from pathlib import Path
from unittest.mock import Mock

import pytest

# The src code is imported without a package prefix
if str(Path(__file__).parent.parent / "src") not in sys.path:
    sys.path.insert(0, str(Path(__file__).parent.parent / "src"))


@pytest.fixture
def temp_dir():
    """Creates a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield tmpdir


@pytest.fixture
def temp_db_path(temp_dir):
    """Creates a temporary catalog path."""
    return os.path.join(temp_dir, "test.db")


@pytest.fixture
def mock_logger():
    """Creates a mock AppLogger."""
    mock = Mock()
    mock.info = Mock()
    mock.warning = Mock()
    mock.error = Mock()
    mock.debug = Mock()
    mock.title = Mock()
    mock.subtitle = Mock()
    mock.table = Mock()
    return mock


@pytest.fixture
def mock_run_catalog():
    """Creates a mock RunCatalog that echoes saved records."""
    mock = Mock()
    mock.find_by_run_dir = Mock(return_value=None)
    mock.save = Mock(side_effect=lambda record: record)
    mock.list_runs = Mock(return_value=[])
    return mock


@pytest.fixture
def mock_artifact_store():
    """Creates a mock ArtifactStore."""
    mock = Mock()
    mock.missing_files = Mock(return_value=[])
    mock.save_run = Mock()
    return mock


@pytest.fixture
def mock_hardware_info():
    """Creates a mock HardwareInfo."""
    from domain.models.hardware import CPUInfo, CPUVendor

    mock = Mock()
    mock.cpu = CPUInfo(vendor=CPUVendor.INTEL, name="Test CPU", arch="X86_64", cores=4)
    mock.default_workers = 4
    return mock


@pytest.fixture
def relativistic_species():
    """Unit-mass, unit-charge relativistic species."""
    from domain.models.species import SpeciesSpec

    return SpeciesSpec(name="ion", mass=1.0, charge=1.0, support_x=0.5, support_p=0.5)


@pytest.fixture
def classical_species():
    """Unit-mass classical species."""
    from domain.constants.model import VelocityModel
    from domain.models.species import SpeciesSpec

    return SpeciesSpec(name="ion", mass=1.0, charge=1.0, model=VelocityModel.CLASSICAL,
                       support_x=0.5, support_p=0.5)


SMALL_RUN_CONFIG = """
[run]
name = tiny
seed = 3
output_dir = {output_dir}

[domain]
cells = 16

[species.0]
name = ion
charge = 1.0
support_x = 0.5
particles = 200
tracers = 3

[species.1]
name = electron
charge = -1.0
mirror_of = 0
mirror_mode = reflect
tracers = 2

[time]
dt = 0.2
t_max = 2.0

[model]
coupling = {coupling}

[analysis]
velocity_cells = 8
"""


@pytest.fixture
def small_config_text(temp_dir):
    """Two-species neutral run of 16 steps on 16^3 cells, writing into temp_dir/run."""
    return SMALL_RUN_CONFIG.format(output_dir=os.path.join(temp_dir, "run"), coupling="true")


@pytest.fixture
def small_config_path(temp_dir, small_config_text):
    """The small run configuration written to temp_dir/tiny.ini."""
    path = os.path.join(temp_dir, "tiny.ini")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(small_config_text)
    return path
