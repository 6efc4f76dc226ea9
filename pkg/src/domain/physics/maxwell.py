"""Staggered-grid Maxwell solver.

E is edge-centered and B face-centered on the node lattice x_i = -extent + i*dx. One step
splits into half B, full E, half B so both fields are available at integer time levels.
Tangential E on the outer faces stays fixed (conducting walls far outside the light cone).
"""
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from domain.constants.model import PoissonSymbol
from domain.exceptions import CFLViolationError, GridShapeError, NeutralityError, OutOfDomainError
from domain.models.diagnostics import FieldDiagnostics
from domain.models.field_grid import B_OFFSETS, E_OFFSETS, FieldGrid, GridGeometry
from domain.models.species import SupportParams

Triple = Tuple[np.ndarray, np.ndarray, np.ndarray]


def cfl_limit(dx: float) -> float:
    return dx / math.sqrt(3.0)


def check_cfl(dt: float, dx: float) -> None:
    if dt > cfl_limit(dx) * (1.0 + 1e-12):
        raise CFLViolationError("[time].dt", f"{dt:.6g} exceeds the CFL bound dx/sqrt(3) = {cfl_limit(dx):.6g}")


def curl_E(ex: np.ndarray, ey: np.ndarray, ez: np.ndarray, dx: float) -> Triple:
    """Forward-difference curl of an edge field, returned on faces."""
    cx = (np.diff(ez, axis=1) - np.diff(ey, axis=2)) / dx
    cy = (np.diff(ex, axis=2) - np.diff(ez, axis=0)) / dx
    cz = (np.diff(ey, axis=0) - np.diff(ex, axis=1)) / dx
    return cx, cy, cz


def curl_B(bx: np.ndarray, by: np.ndarray, bz: np.ndarray, dx: float) -> Triple:
    """Backward-difference curl of a face field on interior edges (zero on boundary edges)."""
    n = bx.shape[0] - 1
    cx = np.zeros((n, n + 1, n + 1))
    cy = np.zeros((n + 1, n, n + 1))
    cz = np.zeros((n + 1, n + 1, n))
    cx[:, 1:-1, 1:-1] = (np.diff(bz, axis=1)[:, :, 1:-1] - np.diff(by, axis=2)[:, 1:-1, :]) / dx
    cy[1:-1, :, 1:-1] = (np.diff(bx, axis=2)[1:-1, :, :] - np.diff(bz, axis=0)[:, :, 1:-1]) / dx
    cz[1:-1, 1:-1, :] = (np.diff(by, axis=0)[:, 1:-1, :] - np.diff(bx, axis=1)[1:-1, :, :]) / dx
    return cx, cy, cz


def divergence_edges(ex: np.ndarray, ey: np.ndarray, ez: np.ndarray, dx: float) -> np.ndarray:
    """Divergence of an edge field at interior nodes, shape (N-1)^3."""
    return (
        np.diff(ex, axis=0)[:, 1:-1, 1:-1]
        + np.diff(ey, axis=1)[1:-1, :, 1:-1]
        + np.diff(ez, axis=2)[1:-1, 1:-1, :]
    ) / dx


def divergence_E(grid: FieldGrid) -> np.ndarray:
    return divergence_edges(grid.ex, grid.ey, grid.ez, grid.dx)


def divergence_B(grid: FieldGrid) -> np.ndarray:
    """Divergence of B at cell centers, shape N^3."""
    return (np.diff(grid.bx, axis=0) + np.diff(grid.by, axis=1) + np.diff(grid.bz, axis=2)) / grid.dx


def field_energy(grid: FieldGrid) -> float:
    """Physical energy 1/2 sum(|E|^2 + |B|^2) dx^3."""
    total = sum(float(np.sum(a * a)) for a in grid.E + grid.B)
    return 0.5 * total * grid.geometry.cell_volume


def discrete_energy(grid: FieldGrid) -> float:
    """Quantity conserved exactly by the vacuum leapfrog: field energy minus (dt^2/8) sum |curl E|^2 dx^3."""
    curl = curl_E(grid.ex, grid.ey, grid.ez, grid.dx)
    correction = sum(float(np.sum(c * c)) for c in curl)
    return field_energy(grid) - 0.125 * grid.dt ** 2 * correction * grid.geometry.cell_volume


def _check_current(grid: FieldGrid, j: Sequence[np.ndarray]) -> None:
    for name, arr, offset in zip(("jx", "jy", "jz"), j, E_OFFSETS):
        expected = grid.geometry.staggered_shape(offset)
        if np.shape(arr) != expected:
            raise GridShapeError(f"{name} has shape {np.shape(arr)}, expected {expected}")


def _advance_b(grid: FieldGrid, dt: float) -> None:
    cx, cy, cz = curl_E(grid.ex, grid.ey, grid.ez, grid.dx)
    grid.bx -= dt * cx
    grid.by -= dt * cy
    grid.bz -= dt * cz


def advance_fields(grid: FieldGrid, j: Optional[Sequence[np.ndarray]] = None) -> FieldGrid:
    """One leapfrog step in place; j is the edge current at the half step."""
    check_cfl(grid.dt, grid.dx)
    if j is not None:
        _check_current(grid, j)
    dt = grid.dt
    _advance_b(grid, 0.5 * dt)
    cx, cy, cz = curl_B(grid.bx, grid.by, grid.bz, grid.dx)
    if j is None:
        grid.ex[:, 1:-1, 1:-1] += dt * cx[:, 1:-1, 1:-1]
        grid.ey[1:-1, :, 1:-1] += dt * cy[1:-1, :, 1:-1]
        grid.ez[1:-1, 1:-1, :] += dt * cz[1:-1, 1:-1, :]
    else:
        jx, jy, jz = j
        grid.ex[:, 1:-1, 1:-1] += dt * (cx - jx)[:, 1:-1, 1:-1]
        grid.ey[1:-1, :, 1:-1] += dt * (cy - jy)[1:-1, :, 1:-1]
        grid.ez[1:-1, 1:-1, :] += dt * (cz - jz)[1:-1, 1:-1, :]
    _advance_b(grid, 0.5 * dt)
    grid.step += 1
    grid.time += dt
    return grid


def step_fields(grid: FieldGrid, j: Optional[Sequence[np.ndarray]] = None) -> FieldGrid:
    """Functional form of advance_fields: returns a new grid."""
    return advance_fields(grid.copy(), j)


def _poisson_potential(rho0: np.ndarray, dx: float, symbol: PoissonSymbol) -> np.ndarray:
    """Solve -Lap(phi) = rho on a zero-padded periodic box twice the node count, then truncate."""
    n = rho0.shape[0]
    m = 2 * n
    padded = np.zeros((m, m, m))
    padded[:n, :n, :n] = rho0
    rho_hat = np.fft.rfftn(padded)
    k_full = 2.0 * np.pi * np.fft.fftfreq(m, d=dx)
    k_half = 2.0 * np.pi * np.fft.rfftfreq(m, d=dx)
    if symbol is PoissonSymbol.DISCRETE:
        k_full = 2.0 / dx * np.sin(0.5 * k_full * dx)
        k_half = 2.0 / dx * np.sin(0.5 * k_half * dx)
    kx, ky, kz = np.meshgrid(k_full, k_full, k_half, indexing="ij")
    k2 = kx ** 2 + ky ** 2 + kz ** 2
    k2[0, 0, 0] = 1.0
    phi_hat = rho_hat / k2
    phi_hat[0, 0, 0] = 0.0
    return np.fft.irfftn(phi_hat, s=padded.shape)[:n, :n, :n]


def _zero_tangential_boundary(grid: FieldGrid) -> None:
    grid.ex[:, [0, -1], :] = 0.0
    grid.ex[:, :, [0, -1]] = 0.0
    grid.ey[[0, -1], :, :] = 0.0
    grid.ey[:, :, [0, -1]] = 0.0
    grid.ez[[0, -1], :, :] = 0.0
    grid.ez[:, [0, -1], :] = 0.0


def init_fields(rho0: np.ndarray, b_potential: Optional[Sequence[np.ndarray]], geometry: GridGeometry,
                dt: float, symbol: PoissonSymbol = PoissonSymbol.DISCRETE,
                neutrality_rtol: float = 1e-9, neutrality_atol: float = 1e-12) -> FieldGrid:
    """
    Builds constraint-compatible initial fields.

    E0 = -grad(phi) with -Lap(phi) = rho0 solved spectrally on a padded box; B0 = curl of the
    edge potential, hence discretely divergence-free.

    Args:
        rho0: Node charge density, shape (N+1)^3
        b_potential: Edge-centered vector potential (ax, ay, az) or None for B0 = 0
        geometry: Grid geometry
        dt: Time step
        symbol: Poisson symbol (DISCRETE gives div E0 = rho0 to round-off)
        neutrality_rtol: Tolerance relative to the total absolute charge
        neutrality_atol: Absolute tolerance

    Returns:
        FieldGrid at time 0

    Raises:
        NeutralityError: If the net charge exceeds the tolerance
        GridShapeError: If array shapes do not match the geometry
    """
    check_cfl(dt, geometry.dx)
    rho0 = np.asarray(rho0, dtype=float)
    if rho0.shape != geometry.node_shape:
        raise GridShapeError(f"rho0 has shape {rho0.shape}, expected {geometry.node_shape}")
    volume = geometry.cell_volume
    net = float(rho0.sum()) * volume
    tolerance = neutrality_atol + neutrality_rtol * float(np.abs(rho0).sum()) * volume
    if abs(net) > tolerance:
        raise NeutralityError(net, tolerance)

    grid = FieldGrid.zeros(geometry, dt)
    if np.any(rho0):
        phi = _poisson_potential(rho0, geometry.dx, symbol)
        grid.ex[...] = -np.diff(phi, axis=0) / geometry.dx
        grid.ey[...] = -np.diff(phi, axis=1) / geometry.dx
        grid.ez[...] = -np.diff(phi, axis=2) / geometry.dx
        _zero_tangential_boundary(grid)
    if b_potential is not None:
        for name, arr, offset in zip(("ax", "ay", "az"), b_potential, E_OFFSETS):
            if np.shape(arr) != geometry.staggered_shape(offset):
                raise GridShapeError(f"{name} has shape {np.shape(arr)}, expected {geometry.staggered_shape(offset)}")
        grid.bx[...], grid.by[...], grid.bz[...] = curl_E(*b_potential, geometry.dx)
    return grid


def _interpolate(values: np.ndarray, offset, geometry: GridGeometry, x: np.ndarray) -> np.ndarray:
    s = (x + geometry.extent) / geometry.dx - np.asarray(offset)
    base = np.floor(s).astype(np.int64)
    base = np.clip(base, 0, np.array(values.shape) - 2)
    w = s - base
    out = np.zeros(x.shape[0])
    for a in (0, 1):
        wa = w[:, 0] if a else 1.0 - w[:, 0]
        for b in (0, 1):
            wb = w[:, 1] if b else 1.0 - w[:, 1]
            for c in (0, 1):
                wc = w[:, 2] if c else 1.0 - w[:, 2]
                out += wa * wb * wc * values[base[:, 0] + a, base[:, 1] + b, base[:, 2] + c]
    return out


def sample_fields(grid: FieldGrid, x) -> Tuple[np.ndarray, np.ndarray]:
    """
    Trilinear interpolation of each staggered component at positions x.

    Args:
        grid: Field grid
        x: Position (3,) or batch (n, 3), at least one cell inside the box

    Returns:
        (E, B) with the same leading shape as x

    Raises:
        OutOfDomainError: If a position is closer than dx to the boundary
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    points = x.reshape(-1, 3)
    limit = grid.extent - grid.dx
    if points.size and np.max(np.abs(points)) > limit * (1.0 + 1e-12):
        raise OutOfDomainError(f"position {np.max(np.abs(points)):.6g} outside sampling region |x_i| <= {limit:.6g}")
    E = np.stack([_interpolate(a, o, grid.geometry, points) for a, o in zip(grid.E, E_OFFSETS)], axis=-1)
    B = np.stack([_interpolate(a, o, grid.geometry, points) for a, o in zip(grid.B, B_OFFSETS)], axis=-1)
    if single:
        return E[0], B[0]
    return E, B


def cell_centered_fields(grid: FieldGrid) -> Tuple[np.ndarray, np.ndarray]:
    """E and B averaged to cell centers, shape (N, N, N, 3) each."""
    ex, ey, ez = grid.E
    e = np.stack([
        0.25 * (ex[:, :-1, :-1] + ex[:, 1:, :-1] + ex[:, :-1, 1:] + ex[:, 1:, 1:]),
        0.25 * (ey[:-1, :, :-1] + ey[1:, :, :-1] + ey[:-1, :, 1:] + ey[1:, :, 1:]),
        0.25 * (ez[:-1, :-1, :] + ez[1:, :-1, :] + ez[:-1, 1:, :] + ez[1:, 1:, :]),
    ], axis=-1)
    bx, by, bz = grid.B
    b = np.stack([
        0.5 * (bx[:-1] + bx[1:]),
        0.5 * (by[:, :-1] + by[:, 1:]),
        0.5 * (bz[:, :, :-1] + bz[:, :, 1:]),
    ], axis=-1)
    return e, b


def cone_mask(geometry: GridGeometry, radius: float) -> np.ndarray:
    """Cells whose centers satisfy |x| <= radius; the cell nearest the origin when none does."""
    c = geometry.cell_centers()
    X, Y, Z = np.meshgrid(c, c, c, indexing="ij")
    r = np.sqrt(X ** 2 + Y ** 2 + Z ** 2)
    mask = r <= radius
    if not mask.any():
        mask = r <= r.min()
    return mask


def _gradient_norm(field: np.ndarray, dx: float) -> np.ndarray:
    total = np.zeros(field.shape[:3])
    for component in range(3):
        for derivative in np.gradient(field[..., component], dx):
            total += derivative ** 2
    return np.sqrt(total)


def field_diagnostics(grid: FieldGrid, rho: Optional[np.ndarray], params: SupportParams,
                      cone_constant: float = 1.0) -> FieldDiagnostics:
    """
    Cone and global sup norms of the fields plus constraint residuals.

    The cone is |x| <= cone_constant * gamma * t on cell centers.
    """
    e, b = cell_centered_fields(grid)
    e_norm = np.linalg.norm(e, axis=-1)
    b_norm = np.linalg.norm(b, axis=-1)
    mask = cone_mask(grid.geometry, cone_constant * params.gamma * grid.time)
    div_e = divergence_E(grid)
    if rho is not None:
        div_e = div_e - np.asarray(rho)[1:-1, 1:-1, 1:-1]
    return FieldDiagnostics(
        time=grid.time,
        sup_e_cone=float(e_norm[mask].max()),
        sup_b_cone=float(b_norm[mask].max()),
        sup_e=float(e_norm.max()),
        sup_b=float(b_norm.max()),
        div_e_residual=float(np.abs(div_e).max()),
        div_b_residual=float(np.abs(divergence_B(grid)).max()),
        energy=field_energy(grid),
        sup_de_cone=float(_gradient_norm(e, grid.dx)[mask].max()),
        sup_db_cone=float(_gradient_norm(b, grid.dx)[mask].max()),
    )


def discrete_laplacian(psi: np.ndarray, dx: float) -> np.ndarray:
    """7-point Laplacian at interior nodes, zero on the boundary."""
    lap = np.zeros_like(psi)
    lap[1:-1, 1:-1, 1:-1] = (
        psi[2:, 1:-1, 1:-1] + psi[:-2, 1:-1, 1:-1]
        + psi[1:-1, 2:, 1:-1] + psi[1:-1, :-2, 1:-1]
        + psi[1:-1, 1:-1, 2:] + psi[1:-1, 1:-1, :-2]
        - 6.0 * psi[1:-1, 1:-1, 1:-1]
    ) / dx ** 2
    return lap


def scalar_wave_leapfrog(psi0: np.ndarray, geometry: GridGeometry, dt: float, steps: int,
                         psi1: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Second-order leapfrog for the scalar wave equation on the node lattice.

    Args:
        psi0: Initial value on nodes
        geometry: Grid geometry
        dt: Time step (CFL-limited)
        steps: Number of steps
        psi1: Initial time derivative on nodes (zero if None)

    Returns:
        psi at time steps*dt; boundary nodes are held at zero
    """
    check_cfl(dt, geometry.dx)
    current = np.array(psi0, dtype=float)
    velocity0 = np.zeros_like(current) if psi1 is None else np.asarray(psi1, dtype=float)
    previous = current - dt * velocity0 + 0.5 * dt ** 2 * discrete_laplacian(current, geometry.dx)
    for _ in range(steps):
        upcoming = 2.0 * current - previous + dt ** 2 * discrete_laplacian(current, geometry.dx)
        upcoming[[0, -1], :, :] = 0.0
        upcoming[:, [0, -1], :] = 0.0
        upcoming[:, :, [0, -1]] = 0.0
        previous, current = current, upcoming
    return current
