"""Port for reading and writing run artifacts."""
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, List, Mapping, Sequence, Tuple

import numpy as np

from domain.constants.model import GridKind
from domain.models.diagnostics import DiagnosticsSeries
from domain.models.field_grid import FieldGrid
from domain.models.momentum_grid import MomentumGridFunction
from domain.models.species import SpeciesSpec
from domain.models.trajectory import TracerRecord
from domain.physics.vlasov_pic import DensitySnapshot, MomentumSnapshot, RunArtifacts

# (column names, rows) of a plot-ready table
Series = Tuple[Sequence[str], np.ndarray]


class ArtifactStore(ABC):
    """Interface for the on-disk layout of run directories."""

    @abstractmethod
    def save_run(self, run_dir: str, artifacts: RunArtifacts, config_text: str) -> None:
        """
        Writes every artifact of a completed run.

        Args:
            run_dir: Run directory (created if needed)
            artifacts: Output of the coupled run
            config_text: Serialized run configuration
        """
        pass

    @abstractmethod
    def missing_files(self, run_dir: str) -> List[str]:
        """Lists the artifacts a completed run must have but the directory lacks."""
        pass

    @abstractmethod
    def load_config_text(self, run_dir: str) -> str:
        pass

    @abstractmethod
    def load_metadata(self, run_dir: str) -> Dict[str, Any]:
        pass

    @abstractmethod
    def load_diagnostics(self, run_dir: str) -> DiagnosticsSeries:
        pass

    @abstractmethod
    def load_field_snapshots(self, run_dir: str) -> List[FieldGrid]:
        pass

    @abstractmethod
    def load_momentum_snapshots(self, run_dir: str) -> List[MomentumSnapshot]:
        pass

    @abstractmethod
    def load_initial_momentum(self, run_dir: str) -> MomentumSnapshot:
        pass

    @abstractmethod
    def load_density_snapshots(self, run_dir: str) -> List[DensitySnapshot]:
        pass

    @abstractmethod
    def load_tracers(self, run_dir: str, species_of: Callable[[int], SpeciesSpec]) -> List[TracerRecord]:
        """
        Reads the tracer histories.

        Args:
            run_dir: Run directory
            species_of: Maps a tracer id to its species
        """
        pass

    @abstractmethod
    def save_grid_function(self, path: str, function: MomentumGridFunction) -> None:
        pass

    @abstractmethod
    def load_grid_function(self, path: str, kind: GridKind = GridKind.MOMENTUM) -> MomentumGridFunction:
        pass

    @abstractmethod
    def save_analysis(self, run_dir: str, report: Mapping[str, Any], series: Mapping[str, Series],
                      functions: Mapping[str, MomentumGridFunction], tracers: Sequence[TracerRecord] = ()) -> str:
        """
        Writes the analysis outputs below the run directory.

        Args:
            run_dir: Run directory
            report: JSON-serializable report
            series: Plot-ready tables keyed by file stem
            functions: Limit profiles keyed by file stem
            tracers: Tracer records carrying scattering labels

        Returns:
            Path of the report file
        """
        pass

    @abstractmethod
    def save_json(self, path: str, payload: Mapping[str, Any]) -> None:
        pass

    @abstractmethod
    def load_json(self, path: str) -> Dict[str, Any]:
        pass
