"""Uniform node-centered lattices in momentum or velocity space and functions sampled on them."""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from domain.constants.model import GridKind
from domain.exceptions import GridShapeError


@dataclass(frozen=True)
class MomentumGrid:
    """Nodes q_i = -half_width + i*spacing, i = 0..nodes-1, on each axis."""
    half_width: float
    nodes: int
    kind: GridKind = GridKind.MOMENTUM

    def __post_init__(self):
        if self.half_width <= 0 or self.nodes < 3:
            raise GridShapeError(f"invalid lattice half_width={self.half_width}, nodes={self.nodes}")

    @classmethod
    def from_spacing(cls, radius: float, spacing: float, kind: GridKind = GridKind.VELOCITY,
                     ghost: int = 1) -> "MomentumGrid":
        """Smallest symmetric lattice of the given spacing covering |q_i| <= radius plus `ghost` rings."""
        n_half = int(math.ceil(radius / spacing - 1e-9)) + ghost
        return cls(half_width=n_half * spacing, nodes=2 * n_half + 1, kind=kind)

    @classmethod
    def from_cells(cls, half_width: float, cells: int, kind: GridKind = GridKind.MOMENTUM) -> "MomentumGrid":
        """Lattice with `cells` histogram bins per axis (rounded up to odd so p = 0 is a node)."""
        nodes = cells if cells % 2 == 1 else cells + 1
        return cls(half_width=half_width, nodes=nodes, kind=kind)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.nodes - 1)

    @property
    def cell_volume(self) -> float:
        return self.spacing ** 3

    @property
    def shape(self) -> tuple:
        return (self.nodes, self.nodes, self.nodes)

    def axis(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.nodes)

    def edges(self) -> np.ndarray:
        """Histogram bin edges: each node sits at the center of its bin."""
        return -self.half_width - 0.5 * self.spacing + self.spacing * np.arange(self.nodes + 1)

    def mesh(self) -> np.ndarray:
        """Node coordinates, shape (n, n, n, 3)."""
        axis = self.axis()
        return np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)

    def radius(self) -> np.ndarray:
        return np.linalg.norm(self.mesh(), axis=-1)


@dataclass
class MomentumGridFunction:
    """Scalar (n,n,n) or vector (n,n,n,3) samples on a MomentumGrid."""
    grid: MomentumGrid
    values: np.ndarray
    tag: str = ""
    species: Optional[int] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[:3] != self.grid.shape or self.values.ndim not in (3, 4):
            raise GridShapeError(f"values of shape {self.values.shape} do not match lattice {self.grid.shape}")

    @property
    def components(self) -> int:
        return 1 if self.values.ndim == 3 else self.values.shape[3]

    @property
    def is_vector(self) -> bool:
        return self.values.ndim == 4

    def integral(self) -> np.ndarray:
        return self.values.sum(axis=(0, 1, 2)) * self.grid.cell_volume

    def sup(self) -> float:
        if self.is_vector:
            return float(np.max(np.linalg.norm(self.values, axis=-1)))
        return float(np.max(np.abs(self.values)))

    def component(self, index: int) -> "MomentumGridFunction":
        return MomentumGridFunction(self.grid, self.values[..., index], f"{self.tag}[{index}]", self.species,
                                    dict(self.meta))

    def interpolate(self, points: np.ndarray, method: str = "linear") -> np.ndarray:
        """Evaluate at arbitrary points (m,3); zero outside the lattice."""
        axis = self.grid.axis()
        interpolator = RegularGridInterpolator(
            (axis, axis, axis), self.values, method=method, bounds_error=False, fill_value=0.0
        )
        return interpolator(np.asarray(points, dtype=float).reshape(-1, 3))
