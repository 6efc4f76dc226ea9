"""Characteristic states, tracer histories and limit estimates."""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from domain.models.species import SpeciesSpec


@dataclass
class TrajectoryState:
    """Position x and momentum p at time t; x, p are (3,) or a batch (n, 3)."""
    x: np.ndarray
    p: np.ndarray
    t: float
    species: SpeciesSpec

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.p = np.asarray(self.p, dtype=float)


@dataclass
class TracerRecord:
    """Sampled history of one characteristic."""
    tracer_id: int
    species: SpeciesSpec
    times: np.ndarray  # (K,)
    X: np.ndarray  # (K, 3)
    P: np.ndarray  # (K, 3)
    Y: np.ndarray  # (K, 3), X - v(P) t
    label: Optional[np.ndarray] = None  # (K, 3), NaN where t < 1
    p_inf_estimate: Optional[np.ndarray] = None

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def at(self, t: float) -> int:
        """Index of the record time closest to t."""
        return int(np.argmin(np.abs(self.times - t)))


@dataclass
class MomentumLimit:
    """Final-time estimate of the limiting momentum with a dyadic error bound."""
    p_inf: np.ndarray
    err_bound: float
    converged: bool
    envelope_exponent: float
    dyadic_differences: List[float] = field(default_factory=list)


@dataclass
class JacobianDiagnostics:
    """Finite-difference dP(T)/dp with its deviation from the identity."""
    matrix: np.ndarray
    deviation_norm: float
    determinant: float
