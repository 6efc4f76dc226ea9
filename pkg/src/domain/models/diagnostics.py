"""Time-stamped diagnostic records."""
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from domain.constants.artifacts import FIELD_DIAGNOSTIC_COLUMNS, RUN_DIAGNOSTIC_COLUMNS


@dataclass(frozen=True)
class FieldDiagnostics:
    """Cone and global field norms at one time."""
    time: float
    sup_e_cone: float
    sup_b_cone: float
    sup_e: float
    sup_b: float
    div_e_residual: float
    div_b_residual: float
    energy: float
    sup_de_cone: float
    sup_db_cone: float

    def as_row(self) -> Tuple[float, ...]:
        return (
            self.time, self.sup_e_cone, self.sup_b_cone, self.sup_e, self.sup_b,
            self.div_e_residual, self.div_b_residual, self.energy, self.sup_de_cone, self.sup_db_cone,
        )


@dataclass
class DiagnosticsSeries:
    """Rows of named scalar columns, the first column being time."""
    columns: Tuple[str, ...] = FIELD_DIAGNOSTIC_COLUMNS + RUN_DIAGNOSTIC_COLUMNS
    rows: List[Tuple[float, ...]] = field(default_factory=list)

    def append(self, row: Sequence[float]) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} values, expected {len(self.columns)}")
        self.rows.append(tuple(float(v) for v in row))

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float).reshape(-1, len(self.columns))

    def column(self, name: str) -> np.ndarray:
        return self.as_array()[:, self.columns.index(name)]

    @property
    def times(self) -> np.ndarray:
        return self.column("time")

    def as_dict(self) -> Dict[str, np.ndarray]:
        data = self.as_array()
        return {name: data[:, i] for i, name in enumerate(self.columns)}

    @classmethod
    def from_array(cls, columns: Sequence[str], data: np.ndarray) -> "DiagnosticsSeries":
        series = cls(columns=tuple(columns))
        for row in np.atleast_2d(data):
            series.append(row)
        return series
