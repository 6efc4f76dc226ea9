"""Limiting objects extracted from run data: F_inf, rho_inf, j_inf and their decay rates."""
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage
from scipy.interpolate import RegularGridInterpolator

from domain.constants.model import VelocityModel
from domain.exceptions import DomainViolationError, InsufficientDataError, OutOfDomainError
from domain.models.field_grid import GridGeometry
from domain.models.initial_data import BumpProfile
from domain.models.momentum_grid import MomentumGrid, MomentumGridFunction
from domain.models.reports import DecayFit, DyadicRow, DyadicTable
from domain.models.species import SpeciesSpec
from domain.physics.kinematics import inv_det_D, inverse_velocity

# Values at or below this (relative to 1 + scale) count as exact zeros
EXACT_ZERO = 1e-14
# Relativistic velocity lattices are evaluated strictly inside |q| < 1
VELOCITY_GUARD = 1.0 - 1e-6


@dataclass
class LimitDerivatives:
    """Derivative grids of rho_inf and j_inf and the elliptic right-hand sides built from them."""
    grad_rho: MomentumGridFunction  # (n,n,n,3)
    grad_j: np.ndarray  # (n,n,n,3,3): [..., i, k] = d j^i / d q_k
    e_source: MomentumGridFunction  # -d_i rho + 3 j^i + q . grad j^i
    b_source: MomentumGridFunction  # curl j


@dataclass
class RescaledComparison:
    """sup_x |t^k g(t, x) - g_inf(x/t)| on a node grid."""
    time: float
    sup_error: float
    reference_sup: float
    error: np.ndarray

    @property
    def relative_error(self) -> float:
        return self.sup_error / self.reference_sup if self.reference_sup > 0 else math.inf


def spatial_average(momenta: np.ndarray, weights: np.ndarray, grid: MomentumGrid,
                    species: Optional[int] = None) -> MomentumGridFunction:
    """
    F(t, p): weight histogram over momentum cells divided by the cell volume.

    Args:
        momenta: Particle momenta (n, 3)
        weights: Particle weights (n,)
        grid: Momentum lattice; every node is the center of its bin
        species: Species tag stored on the result

    Returns:
        MomentumGridFunction whose integral equals the sum of the weights

    Raises:
        OutOfDomainError: If a particle lies outside the outermost bins
    """
    momenta = np.asarray(momenta, dtype=float).reshape(-1, 3)
    limit = grid.half_width + 0.5 * grid.spacing
    if momenta.size and np.max(np.abs(momenta)) > limit:
        raise OutOfDomainError(
            f"momentum {np.max(np.abs(momenta)):.6g} outside the histogram half-width {limit:.6g}"
        )
    edges = grid.edges()
    counts, _ = np.histogramdd(momenta, bins=(edges, edges, edges), weights=np.asarray(weights, dtype=float))
    return MomentumGridFunction(grid, counts / grid.cell_volume, tag="F", species=species)


def smoothing_kernel(width: float) -> np.ndarray:
    """Normalized C2 kernel (1 - d^2/r^2)^3 with radius `width` in lattice cells."""
    if width < 1.0:
        return np.ones((1, 1, 1))
    reach = int(math.floor(width))
    offsets = np.arange(-reach, reach + 1)
    dx, dy, dz = np.meshgrid(offsets, offsets, offsets, indexing="ij")
    d2 = (dx ** 2 + dy ** 2 + dz ** 2) / width ** 2
    kernel = np.where(d2 < 1.0, (1.0 - np.minimum(d2, 1.0)) ** 3, 0.0)
    return kernel / kernel.sum()


def smooth(function: MomentumGridFunction, width: float) -> MomentumGridFunction:
    """Convolve with the C2 kernel and rescale so the integral is unchanged."""
    kernel = smoothing_kernel(width)
    if kernel.size == 1:
        return MomentumGridFunction(function.grid, function.values.copy(), function.tag, function.species,
                                    dict(function.meta))
    values = ndimage.convolve(function.values, kernel, mode="constant", cval=0.0)
    raw_mass = function.values.sum()
    smoothed_mass = values.sum()
    if smoothed_mass != 0.0:
        values *= raw_mass / smoothed_mass
    return MomentumGridFunction(function.grid, values, function.tag, function.species, dict(function.meta))


def dyadic_report(times: Sequence[float], values: Sequence[float], quantity: str,
                  scale: Optional[Callable[[float], float]] = None) -> DyadicTable:
    """
    Table of a quantity at dyadic times with ratios and a monotone-decrease verdict.

    Args:
        times: Increasing sample times
        values: Nonnegative values at those times
        quantity: Name stored on the table
        scale: Optional map t -> factor applied to the value in the `scaled` column

    Returns:
        DyadicTable; `exact` when every value vanishes to round-off
    """
    rows: List[DyadicRow] = []
    previous = None
    for t, value in zip(times, values):
        value = float(value)
        ratio = value / previous if previous not in (None, 0.0) else None
        scaled = value * scale(t) if scale is not None else None
        rows.append(DyadicRow(t=float(t), value=value, ratio=ratio, scaled=scaled))
        previous = value
    exact = bool(rows) and all(abs(row.value) <= EXACT_ZERO for row in rows)
    monotone = len(rows) >= 2 and all(b.value < a.value for a, b in zip(rows, rows[1:]))
    return DyadicTable(quantity=quantity, rows=rows, exact=exact, monotone=monotone)


def rescaled_deviations(times: Sequence[float], values: Sequence[float], checkpoints: Sequence[float],
                        power: float, quantity: str) -> DyadicTable:
    """Dyadic table of |t_(k+1)^power v(t_(k+1)) - t_k^power v(t_k)| over the checkpoints, stored at t_k."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    at = sorted({int(np.argmin(np.abs(times - t))) for t in checkpoints})
    t = times[at]
    scaled = t ** power * values[at]
    return dyadic_report(t[:-1], np.abs(np.diff(scaled)), quantity)


def _cauchy_scale(t: float) -> float:
    """t / ln^5 t for t > e, 1 otherwise."""
    return t / math.log(t) ** 5 if t > math.e else 1.0


def limit_F(snapshots: Sequence[MomentumGridFunction], times: Sequence[float],
            kernel_width: float = 2.0) -> Tuple[MomentumGridFunction, DyadicTable]:
    """
    F_inf as the smoothed latest snapshot, with the dyadic Cauchy report of the snapshots.

    The report holds sup |F(t_k) - F(t_(k-1))| at t_(k-1), scaled by t / ln^5 t.

    Raises:
        InsufficientDataError: With fewer than 3 snapshots at positive times
    """
    pairs = [(t, f) for t, f in zip(times, snapshots) if t > 0]
    if len(pairs) < 3:
        raise InsufficientDataError(f"limit_F needs at least 3 dyadic snapshots, got {len(pairs)}")
    differences = [float(np.max(np.abs(b.values - a.values))) for (_, a), (_, b) in zip(pairs, pairs[1:])]
    table = dyadic_report([t for t, _ in pairs[:-1]], differences, f"F[{pairs[-1][1].species}]", _cauchy_scale)
    limit = smooth(pairs[-1][1], kernel_width)
    limit.tag = "F_inf"
    limit.meta.update({"kernel_width": kernel_width, "time": pairs[-1][0]})
    return limit, table


def _outer_shell_is_zero(function: MomentumGridFunction) -> bool:
    v = function.values
    return not (np.any(v[0]) or np.any(v[-1]) or np.any(v[:, 0]) or np.any(v[:, -1])
                or np.any(v[:, :, 0]) or np.any(v[:, :, -1]))


def _velocity_domain(grid: MomentumGrid, species: Sequence[SpeciesSpec]) -> np.ndarray:
    q = grid.mesh()
    if any(s.model is VelocityModel.RELATIVISTIC for s in species):
        return np.linalg.norm(q, axis=-1) < VELOCITY_GUARD
    return np.ones(grid.shape, dtype=bool)


def _pullback(function: MomentumGridFunction, q: np.ndarray, species: SpeciesSpec) -> np.ndarray:
    """D(v^-1 q) F(v^-1 q) for velocities q (m, 3)."""
    p = inverse_velocity(q, species)
    limit = function.grid.half_width + 0.5 * function.grid.spacing
    outside = np.any(np.abs(p) > limit, axis=-1)
    if outside.any() and not _outer_shell_is_zero(function):
        raise OutOfDomainError(
            f"velocity lattice reaches momenta beyond the F_inf lattice (half-width {function.grid.half_width:.6g}) "
            "where F_inf is not zero"
        )
    values = function.interpolate(p) * inv_det_D(p, species)
    values[outside] = 0.0
    return values


def limit_rho(f_inf: Sequence[MomentumGridFunction], species: Sequence[SpeciesSpec], grid: MomentumGrid,
              charges: Optional[Sequence[float]] = None) -> MomentumGridFunction:
    """
    rho_inf(q) = sum over species of e D(v^-1 q) F_inf(v^-1 q), zero where |q| >= 1.

    Args:
        f_inf: Limit of the spatial average per species
        species: Species matching f_inf
        grid: Velocity lattice
        charges: Overrides of the species charges (ones give the number density limit)

    Raises:
        OutOfDomainError: If the velocity lattice maps outside the F_inf lattice where F_inf is nonzero
    """
    if len(f_inf) != len(species):
        raise ValueError(f"{len(f_inf)} F_inf grids for {len(species)} species")
    charges = [s.charge for s in species] if charges is None else list(charges)
    mask = _velocity_domain(grid, species)
    q = grid.mesh()[mask]
    values = np.zeros(grid.shape)
    for function, spec, charge in zip(f_inf, species, charges):
        if charge == 0.0:
            continue
        values[mask] += charge * _pullback(function, q, spec)
    return MomentumGridFunction(grid, values, tag="rho_inf")


def pushforward_density(profile: BumpProfile, species: SpeciesSpec, grid: MomentumGrid) -> MomentumGridFunction:
    """Free-transport limit D(v^-1 q) F0(v^-1 q) of t^3 n(t, t q) in closed form (number density)."""
    mask = _velocity_domain(grid, [species])
    p = inverse_velocity(grid.mesh()[mask], species)
    values = np.zeros(grid.shape)
    values[mask] = inv_det_D(p, species) * profile.momentum_marginal(p)
    return MomentumGridFunction(grid, values, tag="pushforward")


def limit_j(rho_inf: MomentumGridFunction) -> MomentumGridFunction:
    """j_inf(q) = q rho_inf(q)."""
    values = rho_inf.grid.mesh() * rho_inf.values[..., None]
    return MomentumGridFunction(rho_inf.grid, values, tag="j_inf", species=rho_inf.species)


def _gradient(values: np.ndarray, spacing: float) -> np.ndarray:
    return np.stack(np.gradient(values, spacing, edge_order=2), axis=-1)


def limit_derivatives(rho_inf: MomentumGridFunction, j_inf: MomentumGridFunction) -> LimitDerivatives:
    """Second-order differences of rho_inf and j_inf and the E/B right-hand sides."""
    grid = rho_inf.grid
    h = grid.spacing
    q = grid.mesh()
    grad_rho = _gradient(rho_inf.values, h)
    grad_j = np.stack([_gradient(j_inf.values[..., i], h) for i in range(3)], axis=-2)
    transport = np.einsum("...k,...ik->...i", q, grad_j)
    e_source = -grad_rho + 3.0 * j_inf.values + transport
    curl = np.stack([
        grad_j[..., 2, 1] - grad_j[..., 1, 2],
        grad_j[..., 0, 2] - grad_j[..., 2, 0],
        grad_j[..., 1, 0] - grad_j[..., 0, 1],
    ], axis=-1)
    return LimitDerivatives(
        grad_rho=MomentumGridFunction(grid, grad_rho, tag="grad_rho_inf"),
        grad_j=grad_j,
        e_source=MomentumGridFunction(grid, e_source, tag="E_source"),
        b_source=MomentumGridFunction(grid, curl, tag="B_source"),
    )


def _check_cone_span(function: MomentumGridFunction, geometry: GridGeometry, t: float) -> None:
    if t <= 0:
        raise InsufficientDataError(f"rescaled comparison needs t > 0, got {t}")
    if function.grid.half_width * t < 4.0 * geometry.dx:
        raise InsufficientDataError(
            f"at t = {t:.6g} the cone of radius {function.grid.half_width * t:.4g} spans fewer than 4 cells"
        )


def rescaled_compare(rho_space: np.ndarray, geometry: GridGeometry, rho_inf: MomentumGridFunction,
                     t: float) -> RescaledComparison:
    """
    sup_x |t^3 rho(t, x) - rho_inf(x/t)| over the node grid.

    Raises:
        InsufficientDataError: If t is not positive or the cone spans fewer than 4 cells
    """
    _check_cone_span(rho_inf, geometry, t)
    points = np.stack(geometry.mesh(), axis=-1).reshape(-1, 3) / t
    reference = rho_inf.interpolate(points).reshape(geometry.node_shape)
    error = t ** 3 * np.asarray(rho_space) - reference
    return RescaledComparison(time=t, sup_error=float(np.max(np.abs(error))),
                              reference_sup=rho_inf.sup(), error=error)


def rescaled_compare_gradient(rho_space: np.ndarray, geometry: GridGeometry, grad_rho_inf: MomentumGridFunction,
                              t: float) -> RescaledComparison:
    """sup_x |t^4 grad rho(t, x) - (grad rho_inf)(x/t)| over the node grid."""
    _check_cone_span(grad_rho_inf, geometry, t)
    points = np.stack(geometry.mesh(), axis=-1).reshape(-1, 3) / t
    reference = grad_rho_inf.interpolate(points).reshape(geometry.node_shape + (3,))
    error = t ** 4 * _gradient(np.asarray(rho_space), geometry.dx) - reference
    return RescaledComparison(time=t, sup_error=float(np.max(np.linalg.norm(error, axis=-1))),
                              reference_sup=grad_rho_inf.sup(), error=error)


def decay_fit(times: Sequence[float], values: Sequence[float], quantity: str,
              window: Optional[Tuple[float, float]] = None, log_term: bool = False,
              min_decades: float = 1.0) -> DecayFit:
    """
    Least-squares fit log v = a + k log t (+ m log log t) over a time window.

    Args:
        times: Sample times
        values: Series values
        quantity: Name stored on the fit
        window: (t1, t2); defaults to the last `min_decades` decades of the series
        log_term: Fit the log-power m as well (requires t > 1)
        min_decades: Minimal window length in decades

    Returns:
        DecayFit; identically zero windows give DecayFit.zero

    Raises:
        InsufficientDataError: If the window is shorter than min_decades or has fewer than 3 points
        DomainViolationError: If the window contains negative values or mixes zeros with positive values
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is None:
        end = float(times.max())
        window = (end / 10.0 ** min_decades, end)
    t1, t2 = window
    if t1 <= 0 or math.log10(t2 / t1) < min_decades - 1e-9:
        raise InsufficientDataError(f"{quantity}: window [{t1:.6g}, {t2:.6g}] spans less than {min_decades} decade(s)")
    mask = (times >= t1 * (1.0 - 1e-12)) & (times <= t2 * (1.0 + 1e-12))
    if log_term:
        mask &= times > 1.0
    n = int(mask.sum())
    if n < 3:
        raise InsufficientDataError(f"{quantity}: {n} samples in [{t1:.6g}, {t2:.6g}], need at least 3")
    t = times[mask]
    v = values[mask]
    if np.all(v == 0.0):
        return DecayFit.zero(quantity, float(t.min()), float(t.max()), n)
    if np.any(v <= 0.0):
        raise DomainViolationError(f"{quantity}: nonpositive values in the fit window")
    columns = [np.ones(n), np.log(t)]
    if log_term:
        columns.append(np.log(np.log(t)))
    design = np.column_stack(columns)
    target = np.log(v)
    coeffs, *_ = np.linalg.lstsq(design, target, rcond=None)
    residual = float(np.sqrt(np.mean((design @ coeffs - target) ** 2)))
    return DecayFit(
        quantity=quantity,
        t_start=float(t.min()),
        t_end=float(t.max()),
        exponent=float(coeffs[1]),
        log_power=float(coeffs[2]) if log_term else None,
        residual=residual,
        n_points=n,
    )
