"""Run directory layout on the local filesystem."""
import io
import json
import math
import os
import struct
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Sequence

import numpy as np

from domain.constants.artifacts import (
    ANALYSIS_DIR,
    CONFIG_FILE,
    DENSITY_DIR,
    DIAGNOSTICS_FILE,
    FIELD_HEADER_FORMAT,
    FIELD_MAGIC,
    FIELD_VERSION,
    FIELDS_DIR,
    GRID_HEADER_FORMAT,
    GRID_MAGIC,
    GRID_VERSION,
    METADATA_FILE,
    MOMENTUM_DIR,
    REPORT_FILE,
    TRACER_COLUMNS,
    TRACERS_FILE,
    density_snapshot_name,
    field_snapshot_name,
    initial_momentum_name,
    momentum_snapshot_name,
)
from domain.constants.model import GridKind
from domain.exceptions import ArtifactError
from domain.models.diagnostics import DiagnosticsSeries
from domain.models.field_grid import B_OFFSETS, E_OFFSETS, FieldGrid, GridGeometry
from domain.models.momentum_grid import MomentumGrid, MomentumGridFunction
from domain.models.species import SpeciesSpec
from domain.models.trajectory import TracerRecord
from domain.physics.vlasov_pic import DensitySnapshot, MomentumSnapshot, RunArtifacts
from domain.ports.artifact_store import ArtifactStore, Series

FLOAT = np.dtype("<f8")
CSV_FORMAT = "%.17g"
_FIELD_HEADER = struct.Struct(FIELD_HEADER_FORMAT)
_GRID_HEADER = struct.Struct(GRID_HEADER_FORMAT)


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if hasattr(value, "value"):
        return value.value
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def _sanitize(value: Any) -> Any:
    """Non-finite floats become strings so the JSON stays standard."""
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    return value


class LocalArtifactStore(ArtifactStore):
    """Reads and writes run directories with binary, CSV and JSON codecs."""

    # Codecs

    def _require(self, path: Path, stage: str = "run") -> Path:
        if not path.is_file():
            raise ArtifactError(f"{path}: missing artifact; re-run the '{stage}' stage")
        return path

    def write_field_snapshot(self, path: str, grid: FieldGrid) -> None:
        header = _FIELD_HEADER.pack(FIELD_MAGIC, FIELD_VERSION, grid.cells, grid.extent, grid.time, grid.dt)
        with open(path, "wb") as f:
            f.write(header)
            for component in grid.E + grid.B:
                f.write(np.asarray(component, dtype=FLOAT).tobytes(order="F"))

    def read_field_snapshot(self, path: str) -> FieldGrid:
        data = self._require(Path(path)).read_bytes()
        if len(data) < _FIELD_HEADER.size:
            raise ArtifactError(f"{path}: truncated field snapshot header")
        magic, version, cells, extent, time, dt = _FIELD_HEADER.unpack_from(data)
        if magic != FIELD_MAGIC or version != FIELD_VERSION:
            raise ArtifactError(f"{path}: not an RVMF v{FIELD_VERSION} file")
        try:
            geometry = GridGeometry(extent=extent, cells=cells)
        except ValueError as e:
            raise ArtifactError(f"{path}: {e}") from e
        shapes = [geometry.staggered_shape(o) for o in E_OFFSETS + B_OFFSETS]
        expected = _FIELD_HEADER.size + sum(int(np.prod(s)) for s in shapes) * FLOAT.itemsize
        if len(data) != expected:
            raise ArtifactError(f"{path}: expected {expected} bytes, found {len(data)}")
        arrays, offset = [], _FIELD_HEADER.size
        for shape in shapes:
            count = int(np.prod(shape))
            flat = np.frombuffer(data, dtype=FLOAT, count=count, offset=offset)
            arrays.append(flat.reshape(shape, order="F").copy())
            offset += count * FLOAT.itemsize
        return FieldGrid(geometry, dt, time, *arrays, step=int(round(time / dt)))

    def save_grid_function(self, path: str, function: MomentumGridFunction) -> None:
        tag = function.tag.encode("utf-8")[:16]
        species = -1 if function.species is None else function.species
        header = _GRID_HEADER.pack(GRID_MAGIC, GRID_VERSION, tag, function.grid.nodes, function.components,
                                   function.grid.half_width, function.grid.spacing, species)
        with open(path, "wb") as f:
            f.write(header)
            f.write(np.asarray(function.values, dtype=FLOAT).tobytes(order="F"))

    def load_grid_function(self, path: str, kind: GridKind = GridKind.MOMENTUM) -> MomentumGridFunction:
        data = self._require(Path(path)).read_bytes()
        if len(data) < _GRID_HEADER.size:
            raise ArtifactError(f"{path}: truncated grid function header")
        magic, version, tag, nodes, components, half_width, _, species = _GRID_HEADER.unpack_from(data)
        if magic != GRID_MAGIC or version != GRID_VERSION:
            raise ArtifactError(f"{path}: not an RVMH v{GRID_VERSION} file")
        shape = (nodes, nodes, nodes) if components == 1 else (nodes, nodes, nodes, components)
        expected = _GRID_HEADER.size + int(np.prod(shape)) * FLOAT.itemsize
        if len(data) != expected:
            raise ArtifactError(f"{path}: expected {expected} bytes, found {len(data)}")
        values = np.frombuffer(data, dtype=FLOAT, offset=_GRID_HEADER.size).reshape(shape, order="F").copy()
        return MomentumGridFunction(
            grid=MomentumGrid(half_width=half_width, nodes=nodes, kind=kind),
            values=values,
            tag=tag.rstrip(b"\0").decode("utf-8"),
            species=None if species < 0 else species,
        )

    def write_table(self, path: str, columns: Sequence[str], data: np.ndarray) -> None:
        data = np.asarray(data, dtype=float).reshape(-1, len(columns))
        np.savetxt(path, data, delimiter=",", header=",".join(columns), comments="", fmt=CSV_FORMAT)

    def read_table(self, path: str):
        text = self._require(Path(path)).read_text(encoding="utf-8")
        lines = text.splitlines()
        if not lines:
            raise ArtifactError(f"{path}: empty table")
        columns = tuple(lines[0].split(","))
        if len(lines) == 1:
            return columns, np.empty((0, len(columns)))
        try:
            data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
        except ValueError as e:
            raise ArtifactError(f"{path}: corrupt table ({e})") from e
        if data.shape[1] != len(columns):
            raise ArtifactError(f"{path}: rows have {data.shape[1]} values for {len(columns)} columns")
        return columns, data

    def save_json(self, path: str, payload: Mapping[str, Any]) -> None:
        text = json.dumps(_sanitize(dict(payload)), sort_keys=True, indent=2, default=_jsonable)
        Path(path).write_text(text + "\n", encoding="utf-8")

    def load_json(self, path: str) -> Dict[str, Any]:
        try:
            return json.loads(self._require(Path(path)).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ArtifactError(f"{path}: corrupt JSON ({e})") from e

    # Run directory

    def save_run(self, run_dir: str, artifacts: RunArtifacts, config_text: str) -> None:
        root = Path(run_dir)
        for sub in (FIELDS_DIR, MOMENTUM_DIR, DENSITY_DIR):
            (root / sub).mkdir(parents=True, exist_ok=True)
        (root / CONFIG_FILE).write_text(config_text, encoding="utf-8")
        self.save_json(str(root / METADATA_FILE), artifacts.metadata)
        self.write_table(str(root / DIAGNOSTICS_FILE), artifacts.diagnostics.columns,
                         artifacts.diagnostics.as_array())
        self._write_tracers(str(root / TRACERS_FILE), artifacts.tracers)
        for k, grid in enumerate(artifacts.field_snapshots):
            self.write_field_snapshot(str(root / FIELDS_DIR / field_snapshot_name(k)), grid)
        for k, snapshot in enumerate(artifacts.density_snapshots):
            stacked = np.concatenate([snapshot.charge[None], snapshot.number], axis=0)
            np.save(root / DENSITY_DIR / density_snapshot_name(k), stacked)
        for k, snapshot in enumerate(artifacts.momentum_snapshots):
            for function in snapshot.functions:
                self.save_grid_function(str(root / MOMENTUM_DIR / momentum_snapshot_name(function.species, k)),
                                        function)
        if artifacts.initial_momentum is not None:
            for function in artifacts.initial_momentum.functions:
                self.save_grid_function(str(root / MOMENTUM_DIR / initial_momentum_name(function.species)), function)

    def _expected_files(self, root: Path, metadata: Mapping[str, Any]) -> List[Path]:
        species = len(metadata.get("species", []))
        checkpoints = len(metadata.get("checkpoints", []))
        files = []
        for k in range(checkpoints):
            files.append(root / FIELDS_DIR / field_snapshot_name(k))
            files.append(root / DENSITY_DIR / density_snapshot_name(k))
            files.extend(root / MOMENTUM_DIR / momentum_snapshot_name(s, k) for s in range(species))
        files.extend(root / MOMENTUM_DIR / initial_momentum_name(s) for s in range(species))
        return files

    def missing_files(self, run_dir: str) -> List[str]:
        root = Path(run_dir)
        missing = [name for name in (CONFIG_FILE, METADATA_FILE, DIAGNOSTICS_FILE, TRACERS_FILE)
                   if not (root / name).is_file()]
        if METADATA_FILE in missing:
            return missing
        metadata = self.load_metadata(run_dir)
        missing.extend(os.path.relpath(p, root) for p in self._expected_files(root, metadata) if not p.is_file())
        return missing

    def load_config_text(self, run_dir: str) -> str:
        return self._require(Path(run_dir) / CONFIG_FILE).read_text(encoding="utf-8")

    def load_metadata(self, run_dir: str) -> Dict[str, Any]:
        return self.load_json(str(Path(run_dir) / METADATA_FILE))

    def load_diagnostics(self, run_dir: str) -> DiagnosticsSeries:
        columns, data = self.read_table(str(Path(run_dir) / DIAGNOSTICS_FILE))
        return DiagnosticsSeries.from_array(columns, data)

    def _checkpoint_times(self, run_dir: str) -> List[float]:
        return [float(t) for t in self.load_metadata(run_dir).get("checkpoints", [])]

    def _species_count(self, run_dir: str) -> int:
        return len(self.load_metadata(run_dir).get("species", []))

    def load_field_snapshots(self, run_dir: str) -> List[FieldGrid]:
        root = Path(run_dir)
        return [self.read_field_snapshot(str(root / FIELDS_DIR / field_snapshot_name(k)))
                for k in range(len(self._checkpoint_times(run_dir)))]

    def load_momentum_snapshots(self, run_dir: str) -> List[MomentumSnapshot]:
        root = Path(run_dir)
        species = self._species_count(run_dir)
        return [
            MomentumSnapshot(time=t, functions=[
                self.load_grid_function(str(root / MOMENTUM_DIR / momentum_snapshot_name(s, k)))
                for s in range(species)
            ])
            for k, t in enumerate(self._checkpoint_times(run_dir))
        ]

    def load_initial_momentum(self, run_dir: str) -> MomentumSnapshot:
        root = Path(run_dir)
        return MomentumSnapshot(time=0.0, functions=[
            self.load_grid_function(str(root / MOMENTUM_DIR / initial_momentum_name(s)))
            for s in range(self._species_count(run_dir))
        ])

    def load_density_snapshots(self, run_dir: str) -> List[DensitySnapshot]:
        root = Path(run_dir)
        snapshots = []
        for k, t in enumerate(self._checkpoint_times(run_dir)):
            path = self._require(root / DENSITY_DIR / density_snapshot_name(k))
            try:
                stacked = np.load(path, allow_pickle=False)
            except (ValueError, OSError) as e:
                raise ArtifactError(f"{path}: corrupt density snapshot ({e})") from e
            if stacked.ndim != 4 or stacked.shape[0] < 2:
                raise ArtifactError(f"{path}: unexpected density array shape {stacked.shape}")
            snapshots.append(DensitySnapshot(time=t, charge=stacked[0], number=stacked[1:]))
        return snapshots

    def _write_tracers(self, path: str, records: Sequence[TracerRecord]) -> None:
        blocks = []
        for record in records:
            k = record.times.size
            label = record.label if record.label is not None else np.full((k, 3), np.nan)
            blocks.append(np.column_stack([
                np.full(k, record.tracer_id, dtype=float), record.times, record.X, record.P, record.Y, label,
            ]))
        data = np.vstack(blocks) if blocks else np.empty((0, len(TRACER_COLUMNS)))
        self.write_table(path, TRACER_COLUMNS, data)

    def load_tracers(self, run_dir: str, species_of: Callable[[int], SpeciesSpec]) -> List[TracerRecord]:
        path = str(Path(run_dir) / TRACERS_FILE)
        columns, data = self.read_table(path)
        if tuple(columns) != TRACER_COLUMNS:
            raise ArtifactError(f"{path}: unexpected tracer columns")
        records = []
        ids = data[:, 0].astype(int)
        for tracer_id in dict.fromkeys(ids.tolist()):
            rows = data[ids == tracer_id]
            label = rows[:, 11:14]
            records.append(TracerRecord(
                tracer_id=tracer_id,
                species=species_of(tracer_id),
                times=rows[:, 1].copy(),
                X=rows[:, 2:5].copy(),
                P=rows[:, 5:8].copy(),
                Y=rows[:, 8:11].copy(),
                label=None if np.isnan(label).all() else label.copy(),
            ))
        return records

    def save_analysis(self, run_dir: str, report: Mapping[str, Any], series: Mapping[str, Series],
                      functions: Mapping[str, MomentumGridFunction], tracers: Sequence[TracerRecord] = ()) -> str:
        out = Path(run_dir) / ANALYSIS_DIR
        out.mkdir(parents=True, exist_ok=True)
        for stem in sorted(series):
            columns, data = series[stem]
            self.write_table(str(out / f"{stem}.csv"), columns, data)
        for stem in sorted(functions):
            self.save_grid_function(str(out / f"{stem}.rvmh"), functions[stem])
        if tracers:
            self._write_tracers(str(out / TRACERS_FILE), tracers)
        report_path = out / REPORT_FILE
        self.save_json(str(report_path), report)
        return str(report_path)
