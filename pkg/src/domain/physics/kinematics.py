"""Velocity maps, their Jacobians and the Lorentz force.

All functions accept a single 3-vector or a batch of shape (..., 3) and work with c = 1.
"""
import math

import numpy as np

from domain.constants.model import VelocityModel
from domain.exceptions import DomainViolationError
from domain.models.species import SpeciesSpec, SupportParams

LIGHT_SPEED_GUARD = 1.0 - 1e-12
_IDENTITY = np.eye(3)


def _vectors(a) -> np.ndarray:
    return np.asarray(a, dtype=float)


def _square_norm(a: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...i->...", a, a)


def _outer(a: np.ndarray) -> np.ndarray:
    return a[..., :, None] * a[..., None, :]


def _check_speed(q: np.ndarray) -> np.ndarray:
    speed2 = _square_norm(q)
    if np.any(speed2 >= LIGHT_SPEED_GUARD ** 2):
        raise DomainViolationError(
            f"velocity magnitude {math.sqrt(float(np.max(speed2))):.15g} is not below 1 - 1e-12"
        )
    return speed2


def energy_factor(p, species: SpeciesSpec) -> np.ndarray:
    """p0 = sqrt(m^2 + |p|^2) (relativistic) or m (classical), shape p.shape[:-1]."""
    p = _vectors(p)
    if species.model is VelocityModel.CLASSICAL:
        return np.full(p.shape[:-1], species.mass)
    return np.sqrt(species.mass ** 2 + _square_norm(p))


def velocity(p, species: SpeciesSpec) -> np.ndarray:
    p = _vectors(p)
    return p / energy_factor(p, species)[..., None]


def inverse_velocity(q, species: SpeciesSpec) -> np.ndarray:
    """Momentum with velocity q; relativistic mode requires |q| < 1 - 1e-12."""
    q = _vectors(q)
    if species.model is VelocityModel.CLASSICAL:
        return species.mass * q
    speed2 = _check_speed(q)
    return species.mass * q / np.sqrt(1.0 - speed2)[..., None]


def jacobian_A(p, species: SpeciesSpec) -> np.ndarray:
    """dv/dp = (p0^2 I - p p^T) / p0^3, or I/m for the classical map."""
    p = _vectors(p)
    if species.model is VelocityModel.CLASSICAL:
        return np.broadcast_to(_IDENTITY / species.mass, p.shape[:-1] + (3, 3)).copy()
    p0 = energy_factor(p, species)[..., None, None]
    return (p0 ** 2 * _IDENTITY - _outer(p)) / p0 ** 3


def jacobian_B(q, species: SpeciesSpec) -> np.ndarray:
    """d(v^-1)/dq = m (1 - |q|^2)^(-3/2) [(1 - |q|^2) I + q q^T], or m I for the classical map."""
    q = _vectors(q)
    if species.model is VelocityModel.CLASSICAL:
        return np.broadcast_to(species.mass * _IDENTITY, q.shape[:-1] + (3, 3)).copy()
    slack = (1.0 - _check_speed(q))[..., None, None]
    return species.mass * (slack * _IDENTITY + _outer(q)) / slack ** 1.5


def inv_det_D(p, species: SpeciesSpec) -> np.ndarray:
    """1/|det dv/dp|: p0^5 / m^2 (relativistic) or m^3 (classical)."""
    p = _vectors(p)
    if species.model is VelocityModel.CLASSICAL:
        return np.full(p.shape[:-1], species.mass ** 3)
    return energy_factor(p, species) ** 5 / species.mass ** 2


def lorentz_force(E, B, p, species: SpeciesSpec) -> np.ndarray:
    """e (E + v(p) x B)."""
    E = _vectors(E)
    B = _vectors(B)
    return species.charge * (E + np.cross(velocity(p, species), B))


def support_params(beta: float, mass: float = 1.0,
                   model: VelocityModel = VelocityModel.RELATIVISTIC) -> SupportParams:
    """
    Velocity radius zeta and elliptic radius gamma for the momentum bound beta.

    Args:
        beta: Momentum support bound
        mass: Rest mass used for zeta
        model: Velocity map used for zeta

    Returns:
        SupportParams with zeta = |v| at |p| = beta and gamma = max(1/2, 2 beta / sqrt(1 + 4 beta^2))

    Raises:
        DomainViolationError: If beta is negative
    """
    if beta < 0:
        raise DomainViolationError(f"beta must be nonnegative, got {beta}")
    if model is VelocityModel.CLASSICAL:
        zeta = beta / mass
    else:
        zeta = beta / math.sqrt(mass ** 2 + beta ** 2)
    gamma = max(0.5, 2.0 * beta / math.sqrt(1.0 + 4.0 * beta ** 2))
    return SupportParams(beta=beta, zeta=zeta, gamma=gamma)


def translated_position(x, p, t, species: SpeciesSpec) -> np.ndarray:
    """Y = x - v(p) t."""
    t = np.asarray(t, dtype=float)
    return _vectors(x) - velocity(p, species) * t[..., None]


def cone_margin(x, p, t: float, L: float, species: SpeciesSpec) -> np.ndarray:
    """t - |x + v(p) t| + 2L: distance of the free-streamed point to the light cone."""
    reach = _vectors(x) + velocity(p, species) * t
    return t - np.sqrt(_square_norm(reach)) + 2.0 * L


def cone_margin_bound(t: float, L: float, beta: float) -> float:
    """Lower bound of cone_margin over |x| <= L, |p| <= beta (m = 1, relativistic)."""
    return (t + L) / (2.0 * (1.0 + beta ** 2))
