"""Asymptotic regimes of a completed run."""
from enum import Enum


class Regime(str, Enum):
    """Classification of a run against the two limiting scenarios."""
    NONVANISHING = "nonvanishing"  # rho_inf != 0, modified scattering
    VANISHING = "vanishing"  # rho_inf == 0, fields decay faster
    UNDETERMINED = "undetermined"  # indicators conflict
