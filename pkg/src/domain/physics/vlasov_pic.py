"""Macro-particle discretization of the coupled Vlasov-Maxwell system."""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from domain.constants.model import MirrorMode, VelocityModel
from domain.exceptions import ConeEscapeError, DomainViolationError, OutOfDomainError
from domain.models.diagnostics import DiagnosticsSeries
from domain.models.field_grid import E_OFFSETS, FieldGrid, GridGeometry
from domain.models.initial_data import InitialDataSpec, bump
from domain.models.momentum_grid import MomentumGridFunction
from domain.models.particles import ParticleEnsemble
from domain.models.reports import ConservationSummary
from domain.models.run_config import RunConfig
from domain.models.trajectory import TracerRecord
from domain.physics.asymptotics import spatial_average
from domain.physics.characteristics import kick, make_record
from domain.physics.kinematics import support_params, velocity
from domain.physics.maxwell import (
    advance_fields,
    divergence_edges,
    field_diagnostics,
    init_fields,
    sample_fields,
)
from domain.ports.logger import AppLogger

# Particles handled per vectorized deposit pass
DEPOSIT_BATCH = 8192
_STENCIL = np.arange(4)

_RADIUS_TABLE = np.linspace(0.0, 1.0, 16385)
_RADIUS_CDF = (315.0 / 16.0) * (
    _RADIUS_TABLE ** 3 / 3.0 - 3.0 * _RADIUS_TABLE ** 5 / 5.0
    + 3.0 * _RADIUS_TABLE ** 7 / 7.0 - _RADIUS_TABLE ** 9 / 9.0
)


@dataclass
class DensitySnapshot:
    """Nominal charge density and per-species number densities on nodes."""
    time: float
    charge: np.ndarray  # (N+1)^3
    number: np.ndarray  # (S, N+1, N+1, N+1)


@dataclass
class MomentumSnapshot:
    """Spatial averages F(t, p) of every species."""
    time: float
    functions: List[MomentumGridFunction]


@dataclass
class RunArtifacts:
    """Everything a coupled run produces."""
    config: RunConfig
    metadata: Dict[str, Any]
    diagnostics: DiagnosticsSeries
    field_snapshots: List[FieldGrid] = field(default_factory=list)
    density_snapshots: List[DensitySnapshot] = field(default_factory=list)
    momentum_snapshots: List[MomentumSnapshot] = field(default_factory=list)
    initial_momentum: Optional[MomentumSnapshot] = None
    tracers: List[TracerRecord] = field(default_factory=list)
    conservation: ConservationSummary = field(default_factory=ConservationSummary)


# Sampling

def bump_radius_quantile(u: np.ndarray) -> np.ndarray:
    """Inverse radial CDF of the normalized (1 - r^2)^3 density on the unit ball."""
    return np.interp(u, _RADIUS_CDF, _RADIUS_TABLE)


def _sample_ball(u: np.ndarray, center, radius: float) -> np.ndarray:
    r = radius * bump_radius_quantile(u[:, 0])
    cos_theta = 2.0 * u[:, 1] - 1.0
    sin_theta = np.sqrt(np.maximum(0.0, 1.0 - cos_theta ** 2))
    phi = 2.0 * np.pi * u[:, 2]
    direction = np.column_stack([sin_theta * np.cos(phi), sin_theta * np.sin(phi), cos_theta])
    return np.asarray(center, dtype=float) + r[:, None] * direction


def sample_particles(spec: InitialDataSpec, seed: int) -> ParticleEnsemble:
    """
    Samples every species with equal weights M/N from scrambled Halton points.

    Mirrored species reuse the points of their source species, either unchanged (copy)
    or reflected through the origin (reflect).

    Args:
        spec: Initial data of all species
        seed: Sampling seed

    Returns:
        ParticleEnsemble ordered by species, tracers first within each species

    Raises:
        DomainViolationError: If a profile amplitude is negative or a mirror link is invalid
    """
    sampled: Dict[int, Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    xs, ps, ws, indices, tracers = [], [], [], [], []
    for i, entry in enumerate(spec.species):
        if entry.profile.amplitude < 0:
            raise DomainViolationError(f"species {i}: negative profile values (amplitude {entry.profile.amplitude})")
        if entry.mirror_of is not None:
            if entry.mirror_of not in sampled:
                raise DomainViolationError(f"species {i}: mirror_of {entry.mirror_of} is not an earlier species")
            x, p, w = sampled[entry.mirror_of]
            if entry.mirror_mode is MirrorMode.REFLECT:
                x, p = -x, -p
            x, p, w = x.copy(), p.copy(), w.copy()
        else:
            n = entry.particles
            profile = entry.profile
            if n == 1:
                x = np.asarray(profile.center_x, dtype=float)[None, :]
                p = np.asarray(profile.center_p, dtype=float)[None, :]
            else:
                sampler = qmc.Halton(d=6, scramble=True, seed=np.random.default_rng([seed, i]))
                u = sampler.random(n)
                x = _sample_ball(u[:, :3], profile.center_x, profile.radius_x)
                p = _sample_ball(u[:, 3:], profile.center_p, profile.radius_p)
            w = np.full(n, profile.mass / n)
        sampled[i] = (x, p, w)
        flags = np.zeros(x.shape[0], dtype=bool)
        flags[:min(entry.tracers, x.shape[0])] = True
        xs.append(x)
        ps.append(p)
        ws.append(w)
        indices.append(np.full(x.shape[0], i, dtype=np.int64))
        tracers.append(flags)
    tracer = np.concatenate(tracers)
    return ParticleEnsemble(
        x=np.concatenate(xs),
        p=np.concatenate(ps),
        weight=np.concatenate(ws),
        species_index=np.concatenate(indices),
        tracer=tracer,
        species=tuple(entry.species for entry in spec.species),
        seed=seed,
        census={"sampled": int(tracer.size), "tracers": int(tracer.sum()), "escaped": 0},
    )


# Deposition

def _stencil(x: np.ndarray, geometry: GridGeometry) -> Tuple[np.ndarray, np.ndarray]:
    """Lowest node of the 4-node stencil around each particle and the scaled coordinates."""
    s = (x + geometry.extent) / geometry.dx
    base = np.floor(s).astype(np.int64) - 1
    if base.size and (base.min() < 0 or base.max() + 3 > geometry.cells):
        raise OutOfDomainError("particle within one cell of the boundary cannot be deposited")
    return base, s


def _shape(s: np.ndarray, base: np.ndarray) -> np.ndarray:
    """First-order (cloud-in-cell) weights on the 4 stencil nodes, shape (n, 3, 4)."""
    nodes = base[:, :, None] + _STENCIL
    return np.maximum(0.0, 1.0 - np.abs(s[:, :, None] - nodes))


def _scatter(shape: Tuple[int, int, int], base: np.ndarray, counts: Tuple[int, int, int],
             values: np.ndarray) -> np.ndarray:
    """Accumulate local (n, a, b, c) stencil values into a flat array of the given grid shape."""
    ia = base[:, 0, None, None, None] + np.arange(counts[0])[None, :, None, None]
    ib = base[:, 1, None, None, None] + np.arange(counts[1])[None, None, :, None]
    ic = base[:, 2, None, None, None] + np.arange(counts[2])[None, None, None, :]
    flat = np.ravel_multi_index(np.broadcast_arrays(ia, ib, ic), shape)
    return np.bincount(flat.ravel(), weights=values.ravel(), minlength=int(np.prod(shape)))


def _deposit_batch(x_old: Optional[np.ndarray], x_new: np.ndarray, q: np.ndarray, geometry: GridGeometry,
                   dt: float) -> Tuple[np.ndarray, Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]]]:
    nodes = geometry.node_shape
    dx = geometry.dx
    base_new, s_new = _stencil(x_new, geometry)
    if x_old is None:
        s1 = _shape(s_new, base_new)
        weights = q[:, None, None, None] * s1[:, 0, :, None, None] * s1[:, 1, None, :, None] * s1[:, 2, None, None, :]
        return _scatter(nodes, base_new, (4, 4, 4), weights) / dx ** 3, None

    base, s_old = _stencil(x_old, geometry)
    if np.any(np.abs(s_new - s_old) >= 1.0):
        raise OutOfDomainError("a particle moved a full cell in one step")
    s0 = _shape(s_old, base)
    s1 = _shape(s_new, base)
    d = s1 - s0
    x0, y0, z0 = s0[:, 0], s0[:, 1], s0[:, 2]
    dxs, dys, dzs = d[:, 0], d[:, 1], d[:, 2]
    a_ = (slice(None), slice(None), None, None)
    b_ = (slice(None), None, slice(None), None)
    c_ = (slice(None), None, None, slice(None))

    rho_weights = q[:, None, None, None] * s1[:, 0][a_] * s1[:, 1][b_] * s1[:, 2][c_]
    rho = _scatter(nodes, base, (4, 4, 4), rho_weights) / dx ** 3

    # Density-decomposition current: W sums to the change of the 3-D shape product
    wx = dxs[a_] * (y0[b_] * z0[c_] + 0.5 * dys[b_] * z0[c_] + 0.5 * y0[b_] * dzs[c_] + dys[b_] * dzs[c_] / 3.0)
    wy = dys[b_] * (x0[a_] * z0[c_] + 0.5 * dxs[a_] * z0[c_] + 0.5 * x0[a_] * dzs[c_] + dxs[a_] * dzs[c_] / 3.0)
    wz = dzs[c_] * (x0[a_] * y0[b_] + 0.5 * dxs[a_] * y0[b_] + 0.5 * x0[a_] * dys[b_] + dxs[a_] * dys[b_] / 3.0)
    scale = -(q / (dx ** 2 * dt))[:, None, None, None]
    jx_local = scale * np.cumsum(wx, axis=1)[:, :3, :, :]
    jy_local = scale * np.cumsum(wy, axis=2)[:, :, :3, :]
    jz_local = scale * np.cumsum(wz, axis=3)[:, :, :, :3]
    jx = _scatter(geometry.staggered_shape(E_OFFSETS[0]), base, (3, 4, 4), jx_local)
    jy = _scatter(geometry.staggered_shape(E_OFFSETS[1]), base, (4, 3, 4), jy_local)
    jz = _scatter(geometry.staggered_shape(E_OFFSETS[2]), base, (4, 4, 3), jz_local)
    return rho, (jx, jy, jz)


def _deposit_worker(x_old, x_new, q, geometry, dt):
    rho = None
    currents = None
    for start in range(0, x_new.shape[0], DEPOSIT_BATCH):
        stop = start + DEPOSIT_BATCH
        batch_old = None if x_old is None else x_old[start:stop]
        r, j = _deposit_batch(batch_old, x_new[start:stop], q[start:stop], geometry, dt)
        rho = r if rho is None else rho + r
        if j is not None:
            currents = j if currents is None else tuple(a + b for a, b in zip(currents, j))
    return rho, currents


def _deposit(x_old: Optional[np.ndarray], x_new: np.ndarray, q: np.ndarray, geometry: GridGeometry,
             dt: float, workers: int):
    """Per-worker private accumulation over contiguous chunks, merged in worker order."""
    x_new = np.asarray(x_new, dtype=float).reshape(-1, 3)
    q = np.asarray(q, dtype=float).reshape(-1)
    chunks = [c for c in np.array_split(np.arange(x_new.shape[0]), max(1, workers)) if c.size]
    jobs = [(None if x_old is None else x_old[c], x_new[c], q[c]) for c in chunks]
    if len(jobs) <= 1:
        results = [_deposit_worker(*job, geometry, dt) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
            results = list(pool.map(lambda job: _deposit_worker(*job, geometry, dt), jobs))
    rho = np.zeros(int(np.prod(geometry.node_shape)))
    currents = [np.zeros(int(np.prod(geometry.staggered_shape(o)))) for o in E_OFFSETS] if x_old is not None else None
    for r, j in results:
        rho += r
        if currents is not None and j is not None:
            for total, part in zip(currents, j):
                total += part
    rho = rho.reshape(geometry.node_shape)
    if currents is None:
        return rho, None
    return rho, tuple(c.reshape(geometry.staggered_shape(o)) for c, o in zip(currents, E_OFFSETS))


def _deposit_by_species(species_index: Optional[np.ndarray], x_old: Optional[np.ndarray], x_new: np.ndarray,
                        q: np.ndarray, geometry: GridGeometry, dt: float, workers: int):
    """Sum of per-species deposits; species on identical points with opposite charges cancel exactly."""
    if species_index is None:
        return _deposit(x_old, x_new, q, geometry, dt, workers)
    x_new = np.asarray(x_new, dtype=float).reshape(-1, 3)
    q = np.asarray(q, dtype=float).reshape(-1)
    rho, currents = None, None
    for index in np.unique(species_index):
        mask = species_index == index
        r, j = _deposit(None if x_old is None else x_old[mask], x_new[mask], q[mask], geometry, dt, workers)
        rho = r if rho is None else rho + r
        if j is not None:
            currents = j if currents is None else tuple(a + b for a, b in zip(currents, j))
    if rho is None:
        return _deposit(x_old, x_new, q, geometry, dt, workers)
    return rho, currents


def deposit_charge(x: np.ndarray, q: np.ndarray, geometry: GridGeometry, workers: int = 1,
                   species_index: Optional[np.ndarray] = None) -> np.ndarray:
    """Node density of point charges q with first-order shapes, summed species by species when indexed."""
    rho, _ = _deposit_by_species(species_index, None, x, q, geometry, 1.0, workers)
    return rho


def deposit(ensemble: ParticleEnsemble, geometry: GridGeometry, x_old: np.ndarray, x_new: np.ndarray,
            dt: float, charges: Optional[np.ndarray] = None, workers: int = 1):
    """
    Charge density at x_new and the charge-conserving current of the move x_old -> x_new.

    Args:
        ensemble: Particles (provides weights and species charges)
        geometry: Grid geometry
        x_old: Positions at the start of the step
        x_new: Positions at the end of the step
        dt: Step length
        charges: Per-particle charges overriding e * weight
        workers: Number of private accumulators

    Returns:
        (rho, (jx, jy, jz)) satisfying (rho_new - rho_old)/dt + div j = 0 at every node

    Raises:
        OutOfDomainError: If a particle is too close to the boundary or moved a full cell
    """
    if charges is None:
        charges = ensemble.per_particle("charge") * ensemble.weight
    x_old = np.asarray(x_old, dtype=float).reshape(-1, 3)
    return _deposit_by_species(ensemble.species_index, x_old, x_new, charges, geometry, dt, workers)


def number_density(ensemble: ParticleEnsemble, geometry: GridGeometry, workers: int = 1) -> np.ndarray:
    """Per-species number density on nodes, shape (S, N+1, N+1, N+1)."""
    densities = []
    for index in range(len(ensemble.species)):
        mask = ensemble.species_mask(index)
        densities.append(deposit_charge(ensemble.x[mask], ensemble.weight[mask], geometry, workers))
    return np.stack(densities)


def continuity_residual(rho_old: np.ndarray, rho_new: np.ndarray, j: Sequence[np.ndarray],
                        geometry: GridGeometry, dt: float) -> float:
    """max |(rho_new - rho_old)/dt + div j| over interior nodes."""
    change = (rho_new - rho_old)[1:-1, 1:-1, 1:-1] / dt
    return float(np.max(np.abs(change + divergence_edges(*j, geometry.dx))))


# Model switch and seed field

def set_model(config: RunConfig, model: VelocityModel) -> RunConfig:
    """
    Returns a copy of the configuration using the given velocity map.

    Raises:
        ConfigValidationError: If the classical map is chosen with a momentum support >= 1
    """
    updated = config.model_copy(update={"model": config.model.model_copy(update={"velocity": model})})
    return updated.validate_physics()


def seed_potential(geometry: GridGeometry, amplitude: float, radius: float):
    """Compact edge potential whose curl is about (0, 0, amplitude) near the origin."""
    potentials = []
    for component, offset in enumerate(E_OFFSETS):
        X, Y, Z = geometry.mesh(offset)
        envelope = bump(np.sqrt(X ** 2 + Y ** 2 + Z ** 2) / radius)
        if component == 0:
            potentials.append(-0.5 * amplitude * Y * envelope)
        elif component == 1:
            potentials.append(0.5 * amplitude * X * envelope)
        else:
            potentials.append(np.zeros_like(X))
    return tuple(potentials)


# Coupled loop

class _CoupledRun:
    """State of one coupled simulation; run_coupled is the public entry point."""

    def __init__(self, config: RunConfig, logger: Optional[AppLogger], workers: int):
        config.validate_physics()
        self.config = config
        self.logger = logger
        self.workers = max(1, workers)
        self.geometry = config.geometry
        self.dt = config.effective_dt
        self.ensemble = sample_particles(config.initial_data(), config.run.seed)
        self.species = self.ensemble.species
        self.coupled = config.model.coupling
        self.nominal_charge = self.ensemble.per_particle("charge") * self.ensemble.weight
        self.field_charge = self.nominal_charge if self.coupled else np.zeros_like(self.nominal_charge)
        self.masks = [self.ensemble.species_mask(i) for i in range(len(self.species))]
        self.initial_weights = [self.ensemble.total_weight(i) for i in range(len(self.species))]
        self.support_x = config.support_x
        self.params = support_params(config.beta_bound)
        self.zeta_bound = max(support_params(config.beta_bound, s.mass, s.model).zeta for s in self.species)
        self.momentum_grid = config.momentum_grid
        self.diagnostics = DiagnosticsSeries()
        self.conservation = ConservationSummary()
        self.continuity_since_record = 0.0
        self.last_current: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None
        self.tracer_index = self.ensemble.tracer_indices()
        self.tracer_times: List[float] = []
        self.tracer_x: List[np.ndarray] = []
        self.tracer_p: List[np.ndarray] = []
        self.artifacts = RunArtifacts(config=config, metadata={}, diagnostics=self.diagnostics)

    def _kick(self, E: np.ndarray, B: np.ndarray, dt: float) -> None:
        p = self.ensemble.p
        for spec, mask in zip(self.species, self.masks):
            charge = spec.charge if self.coupled else 0.0
            p[mask] = kick(p[mask], E[mask], B[mask], spec, dt, charge=charge)

    def _velocities(self) -> np.ndarray:
        v = np.empty_like(self.ensemble.p)
        for spec, mask in zip(self.species, self.masks):
            v[mask] = velocity(self.ensemble.p[mask], spec)
        return v

    def _fields_at_particles(self, grid: FieldGrid) -> Tuple[np.ndarray, np.ndarray]:
        if not self.coupled:
            zeros = np.zeros_like(self.ensemble.x)
            return zeros, zeros.copy()
        return sample_fields(grid, self.ensemble.x)

    def _check_cone(self, t: float) -> None:
        radius = float(np.max(np.linalg.norm(self.ensemble.x, axis=-1)))
        bound = self.zeta_bound * t + self.support_x + self.geometry.dx
        if radius > bound:
            raise ConeEscapeError(t, radius, bound)

    def _charge_density(self, rho_field: np.ndarray) -> np.ndarray:
        if self.coupled:
            return rho_field
        return deposit_charge(self.ensemble.x, self.nominal_charge, self.geometry, self.workers,
                              self.ensemble.species_index)

    def _record(self, grid: FieldGrid, rho_field: np.ndarray, step: int) -> None:
        t = grid.time
        record = field_diagnostics(grid, rho_field, self.params)
        charge = self._charge_density(rho_field)
        sup_j = 0.0 if self.last_current is None else max(float(np.max(np.abs(c))) for c in self.last_current)
        radius_x = float(np.max(np.linalg.norm(self.ensemble.x, axis=-1)))
        radius_y = float(np.max(np.linalg.norm(self.ensemble.x - self._velocities() * t, axis=-1)))
        beta = float(np.max(np.linalg.norm(self.ensemble.p, axis=-1)))
        self.conservation.beta_measured = max(self.conservation.beta_measured, beta)
        drift = max(
            (abs(self.ensemble.total_weight(i) - w0) / w0 if w0 else 0.0)
            for i, w0 in enumerate(self.initial_weights)
        )
        self.conservation.weight_drift = max(self.conservation.weight_drift, drift)
        self.conservation.div_b_max = max(self.conservation.div_b_max, record.div_b_residual)
        rho_scale = float(np.max(np.abs(rho_field))) or 1.0
        self.conservation.div_e_residual_max = max(self.conservation.div_e_residual_max,
                                                   record.div_e_residual / rho_scale)
        self.diagnostics.append(record.as_row() + (
            float(np.max(np.abs(charge))), sup_j, radius_x, radius_y, beta, drift, self.continuity_since_record,
        ))
        self.continuity_since_record = 0.0
        if self.tracer_index.size:
            self.tracer_times.append(t)
            self.tracer_x.append(self.ensemble.x[self.tracer_index].copy())
            self.tracer_p.append(self.ensemble.p[self.tracer_index].copy())
        if self.logger:
            self.logger.debug(
                f"t={t:.4g} step={step} supE_cone={record.sup_e_cone:.3e} supB_cone={record.sup_b_cone:.3e} "
                f"sup_rho={self.diagnostics.rows[-1][10]:.3e} beta={beta:.4g}"
            )

    def _momentum_snapshot(self, t: float) -> MomentumSnapshot:
        functions = []
        for i, mask in enumerate(self.masks):
            functions.append(spatial_average(self.ensemble.p[mask], self.ensemble.weight[mask],
                                             self.momentum_grid, species=i))
        return MomentumSnapshot(time=t, functions=functions)

    def _checkpoint(self, grid: FieldGrid, rho_field: np.ndarray, index: int) -> None:
        if self.logger:
            self.logger.subtitle(f"Dyadic checkpoint {index}: t = {grid.time:.6g}")
        self.artifacts.field_snapshots.append(grid.copy())
        self.artifacts.density_snapshots.append(DensitySnapshot(
            time=grid.time,
            charge=self._charge_density(rho_field).copy(),
            number=number_density(self.ensemble, self.geometry, self.workers),
        ))
        self.artifacts.momentum_snapshots.append(self._momentum_snapshot(grid.time))

    def execute(self) -> RunArtifacts:
        config = self.config
        dt = self.dt
        rho_field = deposit_charge(self.ensemble.x, self.field_charge, self.geometry, self.workers,
                                   self.ensemble.species_index)
        b_potential = None
        if self.coupled and config.model.b_seed:
            b_potential = seed_potential(self.geometry, config.model.b_seed, self.support_x)
        grid = init_fields(rho_field, b_potential, self.geometry, dt, config.model.poisson_symbol)
        self.artifacts.initial_momentum = self._momentum_snapshot(0.0)

        stride = config.diagnostic_stride
        checkpoints = {step: k for k, step in enumerate(config.checkpoint_steps)}
        total = config.total_steps
        if self.logger:
            self.logger.info(
                f"Running {total} steps of dt={dt:.6g} on {self.geometry.cells}^3 cells "
                f"with {self.ensemble.size} particles ({self.workers} workers)"
            )
        self._record(grid, rho_field, 0)

        E, B = self._fields_at_particles(grid)
        for step in range(1, total + 1):
            t_new = step * dt
            self._kick(E, B, 0.5 * dt)
            x_old = self.ensemble.x.copy()
            self.ensemble.x = x_old + dt * self._velocities()
            self._check_cone(t_new)
            if self.coupled:
                rho_new, current = deposit(self.ensemble, self.geometry, x_old, self.ensemble.x, dt,
                                           charges=self.field_charge, workers=self.workers)
                residual = continuity_residual(rho_field, rho_new, current, self.geometry, dt)
                scale = max(float(np.max(np.abs(rho_new))), float(np.max(np.abs(rho_field)))) or 1.0
                relative = residual * dt / scale
                self.continuity_since_record = max(self.continuity_since_record, relative)
                self.conservation.continuity_residual = max(self.conservation.continuity_residual, relative)
                advance_fields(grid, current)
                rho_field = rho_new
                self.last_current = current
            else:
                advance_fields(grid)
            grid.time = t_new
            E, B = self._fields_at_particles(grid)
            self._kick(E, B, 0.5 * dt)

            if step % stride == 0 or step in checkpoints or step == total:
                self._record(grid, rho_field, step)
            if step in checkpoints:
                self._checkpoint(grid, rho_field, checkpoints[step])

        self.conservation.steps = total
        self.artifacts.conservation = self.conservation
        self.artifacts.tracers = self._tracer_records()
        self.artifacts.metadata = self._metadata()
        return self.artifacts

    def _tracer_records(self) -> List[TracerRecord]:
        if not self.tracer_index.size:
            return []
        times = np.array(self.tracer_times)
        X = np.stack(self.tracer_x, axis=1)
        P = np.stack(self.tracer_p, axis=1)
        records = []
        for k, particle in enumerate(self.tracer_index):
            spec = self.species[self.ensemble.species_index[particle]]
            records.append(make_record(int(particle), spec, times, X[k], P[k]))
        return records

    def _metadata(self) -> Dict[str, Any]:
        config = self.config
        return {
            "seed": config.run.seed,
            "dt": self.dt,
            "steps": config.total_steps,
            "checkpoints": config.checkpoints,
            "checkpoint_steps": config.checkpoint_steps,
            "diagnostic_stride": config.diagnostic_stride,
            "extent": self.geometry.extent,
            "cells": self.geometry.cells,
            "coupling": self.coupled,
            "model": config.model.velocity.value,
            "beta_bound": config.beta_bound,
            "beta_measured": self.conservation.beta_measured,
            "zeta": self.zeta_bound,
            "gamma": self.params.gamma,
            "cone_constant": 1.0,
            "support_x": self.support_x,
            "support_p": config.support_p,
            "amplitude_proxy": config.initial_data().amplitude_proxy,
            "momentum_grid": {"half_width": self.momentum_grid.half_width, "nodes": self.momentum_grid.nodes},
            "species": [
                {
                    "name": spec.name,
                    "mass": spec.mass,
                    "charge": spec.charge,
                    "weight_total": self.initial_weights[i],
                    "particles": int(self.masks[i].sum()),
                    "tracers": int(self.ensemble.tracer[self.masks[i]].sum()),
                }
                for i, spec in enumerate(self.species)
            ],
            "census": dict(self.ensemble.census),
            "conservation": self.conservation.model_dump(),
        }


def run_coupled(config: RunConfig, logger: Optional[AppLogger] = None, workers: int = 1) -> RunArtifacts:
    """
    Advances the coupled system from t = 0 to the last step not beyond t_max.

    Each step: half kick, drift, cone check, charge-conserving deposit, field leapfrog,
    field gather, half kick. Diagnostics are recorded every diagnostic_stride steps and
    snapshots at the dyadic checkpoints dyadic_start * 2^k.

    Raises:
        ConfigValidationError: If the configuration violates a physical constraint
        ConeEscapeError: If a particle leaves |x| <= zeta t + L + dx
    """
    return _CoupledRun(config, logger, workers).execute()
