"""Staggered electromagnetic grid."""
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from domain.exceptions import GridShapeError

Offset = Tuple[float, float, float]

# E lives on cell edges, B on cell faces (offsets in units of dx from the node lattice)
E_OFFSETS: Tuple[Offset, Offset, Offset] = ((0.5, 0.0, 0.0), (0.0, 0.5, 0.0), (0.0, 0.0, 0.5))
B_OFFSETS: Tuple[Offset, Offset, Offset] = ((0.0, 0.5, 0.5), (0.5, 0.0, 0.5), (0.5, 0.5, 0.0))


@dataclass(frozen=True)
class GridGeometry:
    """Cubic box [-extent, extent]^3 split into `cells` cells per axis."""
    extent: float
    cells: int

    def __post_init__(self):
        if self.extent <= 0 or self.cells < 2:
            raise GridShapeError(f"invalid grid geometry extent={self.extent}, cells={self.cells}")

    @property
    def dx(self) -> float:
        return 2.0 * self.extent / self.cells

    @property
    def cell_volume(self) -> float:
        return self.dx ** 3

    @property
    def node_shape(self) -> Tuple[int, int, int]:
        n = self.cells + 1
        return (n, n, n)

    def nodes(self) -> np.ndarray:
        return -self.extent + self.dx * np.arange(self.cells + 1)

    def cell_centers(self) -> np.ndarray:
        return -self.extent + self.dx * (np.arange(self.cells) + 0.5)

    def staggered_shape(self, offset: Offset) -> Tuple[int, int, int]:
        return tuple(self.cells if o else self.cells + 1 for o in offset)

    def coordinates(self, offset: Offset) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """1-D coordinate axes of a staggered component."""
        return tuple(
            -self.extent + self.dx * (np.arange(n) + o)
            for n, o in zip(self.staggered_shape(offset), offset)
        )

    def mesh(self, offset: Offset = (0.0, 0.0, 0.0)) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.meshgrid(*self.coordinates(offset), indexing="ij")


@dataclass
class FieldGrid:
    """E on edges and B on faces of a GridGeometry, both stored at integer time levels."""
    geometry: GridGeometry
    dt: float
    time: float
    ex: np.ndarray
    ey: np.ndarray
    ez: np.ndarray
    bx: np.ndarray
    by: np.ndarray
    bz: np.ndarray
    step: int = field(default=0)

    def __post_init__(self):
        self.validate_shapes()

    @classmethod
    def zeros(cls, geometry: GridGeometry, dt: float, time: float = 0.0) -> "FieldGrid":
        arrays = [np.zeros(geometry.staggered_shape(o)) for o in E_OFFSETS + B_OFFSETS]
        return cls(geometry, dt, time, *arrays)

    @property
    def dx(self) -> float:
        return self.geometry.dx

    @property
    def cells(self) -> int:
        return self.geometry.cells

    @property
    def extent(self) -> float:
        return self.geometry.extent

    @property
    def E(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.ex, self.ey, self.ez)

    @property
    def B(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.bx, self.by, self.bz)

    def validate_shapes(self) -> None:
        for name, arr, offset in zip(("Ex", "Ey", "Ez", "Bx", "By", "Bz"), self.E + self.B, E_OFFSETS + B_OFFSETS):
            expected = self.geometry.staggered_shape(offset)
            if arr.shape != expected:
                raise GridShapeError(f"{name} has shape {arr.shape}, expected {expected}")

    def copy(self) -> "FieldGrid":
        return FieldGrid(
            self.geometry, self.dt, self.time,
            *(a.copy() for a in self.E + self.B),
            step=self.step,
        )
