"""Characteristic ODE integration, limiting momenta and scattering labels."""
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from domain.exceptions import InsufficientDataError
from domain.models.field_grid import FieldGrid
from domain.models.species import SpeciesSpec
from domain.models.trajectory import JacobianDiagnostics, MomentumLimit, TracerRecord, TrajectoryState
from domain.physics.kinematics import energy_factor, jacobian_A, translated_position, velocity
from domain.physics.maxwell import sample_fields

# sampler(t, x) -> (E, B), x of shape (n, 3)
FieldSampler = Callable[[float, np.ndarray], Tuple[np.ndarray, np.ndarray]]
# K_inf(p) -> force, p of shape (3,) or (n, 3)
LimitForceSampler = Callable[[np.ndarray], np.ndarray]

# Ratio of successive dyadic increments below which a momentum sequence counts as converging
CONVERGENCE_RATIO = 0.75


def zero_field_sampler(t: float, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    return np.zeros_like(x), np.zeros_like(x)


def uniform_field_sampler(e_of_t: Callable[[float], Sequence[float]],
                          b_of_t: Optional[Callable[[float], Sequence[float]]] = None) -> FieldSampler:
    """Sampler for spatially uniform fields given as functions of time."""
    def sampler(t: float, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        E = np.broadcast_to(np.asarray(e_of_t(t), dtype=float), x.shape).copy()
        B = np.zeros_like(x) if b_of_t is None else np.broadcast_to(np.asarray(b_of_t(t), dtype=float), x.shape).copy()
        return E, B
    return sampler


def grid_field_sampler(grid: FieldGrid) -> FieldSampler:
    """Sampler reading a frozen field grid (time argument ignored)."""
    def sampler(t: float, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return sample_fields(grid, x)
    return sampler


def kick(p: np.ndarray, E: np.ndarray, B: np.ndarray, species: SpeciesSpec, dt: float,
         charge: Optional[float] = None) -> np.ndarray:
    """
    Rotation-split momentum update over dt: half electric push, magnetic rotation, half electric push.

    Args:
        p: Momenta (..., 3)
        E: Electric field at the particles
        B: Magnetic field at the particles
        species: Species providing mass, charge and velocity model
        dt: Time interval
        charge: Charge override (0 for test particles that feel no force)

    Returns:
        Updated momenta; the rotation preserves |p| when E = 0
    """
    charge = species.charge if charge is None else charge
    p = np.asarray(p, dtype=float)
    p_minus = p + 0.5 * dt * charge * E
    t = 0.5 * dt * charge * B / energy_factor(p_minus, species)[..., None]
    s = 2.0 * t / (1.0 + np.einsum("...i,...i->...", t, t))[..., None]
    p_prime = p_minus + np.cross(p_minus, t)
    p_plus = p_minus + np.cross(p_prime, s)
    return p_plus + 0.5 * dt * charge * E


def drift(x: np.ndarray, p: np.ndarray, species: SpeciesSpec, dt: float) -> np.ndarray:
    return x + dt * velocity(p, species)


def push(state: TrajectoryState, sampler: FieldSampler, dt: float) -> TrajectoryState:
    """Kick-drift-kick step: half kick at (t, x), drift over dt, half kick at (t + dt, x')."""
    species = state.species
    x = state.x.reshape(-1, 3)
    p = state.p.reshape(-1, 3)
    E, B = sampler(state.t, x)
    p_half = kick(p, E, B, species, 0.5 * dt)
    x_new = drift(x, p_half, species, dt)
    E, B = sampler(state.t + dt, x_new)
    p_new = kick(p_half, E, B, species, 0.5 * dt)
    return TrajectoryState(x_new.reshape(state.x.shape), p_new.reshape(state.p.shape), state.t + dt, species)


def _integrate_batch(state: TrajectoryState, sampler: FieldSampler, t_end: float, dt: float,
                     record_every: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if t_end < state.t:
        raise ValueError(f"t_end {t_end} precedes the state time {state.t}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    steps = int(math.ceil((t_end - state.t) / dt - 1e-9))
    step_dt = (t_end - state.t) / steps if steps else dt
    x = state.x.reshape(-1, 3).copy()
    p = state.p.reshape(-1, 3).copy()
    times, xs, ps = [state.t], [x.copy()], [p.copy()]
    current = TrajectoryState(x, p, state.t, state.species)
    for n in range(1, steps + 1):
        current = push(current, sampler, step_dt)
        current.t = state.t + n * step_dt
        if n % record_every == 0 or n == steps:
            times.append(current.t)
            xs.append(current.x.copy())
            ps.append(current.p.copy())
    return np.array(times), np.stack(xs, axis=1), np.stack(ps, axis=1)


def integrate(state: TrajectoryState, sampler: FieldSampler, t_end: float, dt: float,
              record_every: int = 1, tracer_id: int = 0) -> TracerRecord:
    """
    Integrates one characteristic from state.t to t_end.

    The step is shortened uniformly so that t_end is reached exactly.

    Returns:
        TracerRecord with X, P and the translated positions Y = X - v(P) t
    """
    return integrate_many(state, sampler, t_end, dt, record_every, first_id=tracer_id)[0]


def integrate_many(state: TrajectoryState, sampler: FieldSampler, t_end: float, dt: float,
                   record_every: int = 1, first_id: int = 0) -> List[TracerRecord]:
    """Vectorized integrate for a batch state with x, p of shape (n, 3)."""
    times, X, P = _integrate_batch(state, sampler, t_end, dt, record_every)
    return [
        make_record(first_id + k, state.species, times, X[k], P[k])
        for k in range(X.shape[0])
    ]


def make_record(tracer_id: int, species: SpeciesSpec, times: np.ndarray, X: np.ndarray,
                P: np.ndarray) -> TracerRecord:
    times = np.asarray(times, dtype=float)
    return TracerRecord(tracer_id, species, times, np.asarray(X), np.asarray(P),
                        translated_position(X, P, times, species))


def _momentum_at(rec: TracerRecord, t: float) -> np.ndarray:
    return np.array([np.interp(t, rec.times, rec.P[:, i]) for i in range(3)])


def limiting_momentum(rec: TracerRecord, envelope_exponent: float = 1.0) -> MomentumLimit:
    """
    Final-time estimate of the limiting momentum.

    The increment d = |P(T) - P(T/2)| is extrapolated as a geometric tail of a t^-k envelope,
    giving err_bound = d / (2^k - 1).

    Args:
        rec: Tracer record reaching its final time T
        envelope_exponent: k (1 for the generic regime, 2 for vanishing limits)

    Raises:
        InsufficientDataError: If the record does not reach back to T/2
    """
    T = rec.final_time
    if T <= 0 or rec.times[0] > 0.5 * T * (1.0 + 1e-12):
        raise InsufficientDataError(f"record spanning [{rec.times[0]:.6g}, {T:.6g}] has fewer than 2 dyadic checkpoints")
    p_T = rec.P[-1]
    diffs = []
    if rec.times[0] <= 0.25 * T * (1.0 + 1e-12):
        diffs.append(float(np.linalg.norm(_momentum_at(rec, 0.5 * T) - _momentum_at(rec, 0.25 * T))))
    last = float(np.linalg.norm(p_T - _momentum_at(rec, 0.5 * T)))
    diffs.append(last)
    err_bound = last / (2.0 ** envelope_exponent - 1.0)
    scale = 1e-13 * (1.0 + float(np.linalg.norm(p_T)))
    if last <= scale:
        converged = True
    elif len(diffs) == 2:
        converged = last <= CONVERGENCE_RATIO * diffs[0]
    else:
        converged = False
    return MomentumLimit(p_inf=p_T.copy(), err_bound=err_bound, converged=converged,
                         envelope_exponent=envelope_exponent, dyadic_differences=diffs)


def jacobian_dP_dp(x, p, tau: float, sampler: FieldSampler, T: float, h: float,
                   species: SpeciesSpec, dt: float) -> JacobianDiagnostics:
    """Central-difference dP(T)/dp over six perturbed characteristics started at time tau."""
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    offsets = np.vstack([np.eye(3) * h, -np.eye(3) * h])
    batch = TrajectoryState(np.repeat(x[None, :], 6, axis=0), p[None, :] + offsets, tau, species)
    _, _, P = _integrate_batch(batch, sampler, T, dt, record_every=10 ** 9)
    final = P[:, -1, :]
    matrix = (final[:3] - final[3:]).T / (2.0 * h)
    return JacobianDiagnostics(
        matrix=matrix,
        deviation_norm=float(np.linalg.norm(matrix - np.eye(3), 2)),
        determinant=float(np.linalg.det(matrix)),
    )


def scattering_label(rec: TracerRecord, k_inf: Optional[LimitForceSampler],
                     p_inf: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    label(t) = X(t) - v(P_inf) t + ln(t) A(P_inf) K_inf(P_inf) for record times t >= 1.

    Returns:
        (times, labels) restricted to t >= 1

    Raises:
        InsufficientDataError: If K_inf is missing or no record time is >= 1
    """
    if k_inf is None:
        raise InsufficientDataError("limiting force sampler is missing")
    if p_inf is None:
        p_inf = rec.p_inf_estimate if rec.p_inf_estimate is not None else rec.P[-1]
    p_inf = np.asarray(p_inf, dtype=float)
    mask = rec.times >= 1.0
    if not mask.any():
        raise InsufficientDataError("scattering labels need record times t >= 1")
    times = rec.times[mask]
    correction = jacobian_A(p_inf, rec.species) @ np.asarray(k_inf(p_inf), dtype=float)
    labels = rec.X[mask] - np.outer(times, velocity(p_inf, rec.species)) + np.outer(np.log(times), correction)
    return times, labels


def force_convergence(rec: TracerRecord, k_inf: LimitForceSampler,
                      p_inf: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Distance |t^2 dP/dt - K_inf(P_inf)| along the record for t >= 1."""
    if p_inf is None:
        p_inf = rec.p_inf_estimate if rec.p_inf_estimate is not None else rec.P[-1]
    rate = np.gradient(rec.P, rec.times, axis=0)
    mask = rec.times >= 1.0
    limit = np.asarray(k_inf(np.asarray(p_inf, dtype=float)), dtype=float)
    deviation = np.linalg.norm(rec.times[mask, None] ** 2 * rate[mask] - limit, axis=-1)
    return rec.times[mask], deviation


def support_growth_fit(records: Sequence[TracerRecord], t_min: float = 1.0) -> Tuple[float, float, float]:
    """
    Least-squares fit max|Y(t)| = a + b ln t over shared record times t >= t_min.

    Returns:
        (a, b, rms residual)
    """
    if not records:
        raise InsufficientDataError("no tracer records")
    times = records[0].times
    mask = times >= t_min
    if mask.sum() < 3:
        raise InsufficientDataError("support growth fit needs at least 3 record times")
    radius = np.max(np.stack([np.linalg.norm(r.Y[mask], axis=-1) for r in records]), axis=0)
    design = np.column_stack([np.ones(mask.sum()), np.log(times[mask])])
    coeffs, *_ = np.linalg.lstsq(design, radius, rcond=None)
    residual = float(np.sqrt(np.mean((design @ coeffs - radius) ** 2)))
    return float(coeffs[0]), float(coeffs[1]), residual
