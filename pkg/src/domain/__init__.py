"""Domain layer - Models, numerical kernels and ports."""

from domain.constants.model import VelocityModel
from domain.constants.regime import Regime
from domain.exceptions import RvmError

__all__ = [
    "Regime",
    "RvmError",
    "VelocityModel",
]
