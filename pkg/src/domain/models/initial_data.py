"""Closed-form initial phase-space profiles."""
import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from domain.constants.model import MirrorMode
from domain.models.species import SpeciesSpec

Vector3 = Tuple[float, float, float]

# max |d^k/dr^k (1 - r^2)^3| on [0, 1] for k = 0, 1, 2
_BUMP_DERIVATIVE_SUP = (1.0, 6.0 * 0.8 ** 2 / math.sqrt(5.0), 6.0)


def bump(r: np.ndarray) -> np.ndarray:
    """C2 radial bump (1 - r^2)^3 on r < 1, zero outside."""
    r = np.asarray(r, dtype=float)
    return np.where(r < 1.0, (1.0 - np.minimum(r, 1.0) ** 2) ** 3, 0.0)


def bump_integral(radius: float) -> float:
    """Integral over R^3 of (1 - |x|^2/R^2)^3."""
    return 64.0 * math.pi * radius ** 3 / 315.0


def bump_axis_variance(radius: float) -> float:
    """Per-axis variance of the normalized bump density."""
    return radius ** 2 / 11.0


class BumpProfile(BaseModel):
    """Product profile f0(x, p) = amplitude * b(|x - cx|/Rx) * b(|p - cp|/Rp)."""
    model_config = ConfigDict(frozen=True)

    amplitude: float = 1.0
    center_x: Vector3 = (0.0, 0.0, 0.0)
    center_p: Vector3 = (0.0, 0.0, 0.0)
    radius_x: float = Field(default=1.0, gt=0)
    radius_p: float = Field(default=0.25, gt=0)

    @property
    def mass(self) -> float:
        """Particle number carried by the profile."""
        return self.amplitude * bump_integral(self.radius_x) * bump_integral(self.radius_p)

    @property
    def support_x(self) -> float:
        return float(np.linalg.norm(self.center_x)) + self.radius_x

    @property
    def support_p(self) -> float:
        return float(np.linalg.norm(self.center_p)) + self.radius_p

    def density(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        rx = np.linalg.norm(x - np.asarray(self.center_x), axis=-1) / self.radius_x
        rp = np.linalg.norm(p - np.asarray(self.center_p), axis=-1) / self.radius_p
        return self.amplitude * bump(rx) * bump(rp)

    def momentum_marginal(self, p: np.ndarray) -> np.ndarray:
        """F0(p) = integral of f0 over x."""
        p = np.asarray(p, dtype=float)
        rp = np.linalg.norm(p - np.asarray(self.center_p), axis=-1) / self.radius_p
        return self.amplitude * bump_integral(self.radius_x) * bump(rp)

    def c2_proxy(self) -> float:
        """Sup of f0 and its first two derivatives, a proxy for the C2 norm of the data."""
        r = min(self.radius_x, self.radius_p)
        return abs(self.amplitude) * (
            _BUMP_DERIVATIVE_SUP[0] + _BUMP_DERIVATIVE_SUP[1] / r + _BUMP_DERIVATIVE_SUP[2] / r ** 2
        )


class SpeciesInitialData(BaseModel):
    """Species, its profile and how it is discretized."""
    model_config = ConfigDict(frozen=True)

    species: SpeciesSpec
    profile: BumpProfile
    particles: int = Field(default=1000, ge=1)
    tracers: int = Field(default=0, ge=0)
    mirror_of: Optional[int] = None  # index of the species whose points are reused
    mirror_mode: MirrorMode = MirrorMode.COPY

    @property
    def mass(self) -> float:
        return self.profile.mass


class InitialDataSpec(BaseModel):
    """Initial data of all species."""
    model_config = ConfigDict(frozen=True)

    species: List[SpeciesInitialData]
    neutrality_rtol: float = 1e-12

    def source_mass(self, index: int) -> float:
        """Particle number of a species, following mirror links to the sampled source."""
        entry = self.species[index]
        if entry.mirror_of is not None:
            return self.source_mass(entry.mirror_of)
        return entry.mass

    @property
    def net_charge(self) -> float:
        return sum(s.species.charge * self.source_mass(i) for i, s in enumerate(self.species))

    @property
    def total_abs_charge(self) -> float:
        return sum(abs(s.species.charge) * self.source_mass(i) for i, s in enumerate(self.species))

    @property
    def total_mass(self) -> float:
        return sum(self.source_mass(i) for i in range(len(self.species)))

    @property
    def amplitude_proxy(self) -> float:
        return max(s.profile.c2_proxy() for s in self.species)

    @property
    def is_neutral(self) -> bool:
        return abs(self.net_charge) <= self.neutrality_rtol * max(self.total_abs_charge, 1e-300)
