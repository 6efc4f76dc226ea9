"""Weighted macro-particle ensemble."""
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from domain.models.species import SpeciesSpec


@dataclass
class ParticleEnsemble:
    """Per-particle position, momentum, weight, species index and tracer flag."""
    x: np.ndarray  # (n, 3)
    p: np.ndarray  # (n, 3)
    weight: np.ndarray  # (n,)
    species_index: np.ndarray  # (n,) int
    tracer: np.ndarray  # (n,) bool
    species: Tuple[SpeciesSpec, ...]
    seed: int = 0
    census: Dict[str, int] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return int(self.weight.shape[0])

    def species_mask(self, index: int) -> np.ndarray:
        return self.species_index == index

    def total_weight(self, index: int) -> float:
        return float(self.weight[self.species_mask(index)].sum())

    def per_particle(self, attribute: str) -> np.ndarray:
        """Broadcast a species attribute (mass, charge) to all particles."""
        values = np.array([getattr(s, attribute) for s in self.species], dtype=float)
        return values[self.species_index]

    def tracer_indices(self) -> np.ndarray:
        return np.flatnonzero(self.tracer)

    def copy(self) -> "ParticleEnsemble":
        return ParticleEnsemble(
            self.x.copy(), self.p.copy(), self.weight.copy(), self.species_index.copy(),
            self.tracer.copy(), self.species, self.seed, dict(self.census),
        )
