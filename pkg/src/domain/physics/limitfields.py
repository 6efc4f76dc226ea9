"""Dirichlet problems for the limiting fields E_inf, B_inf on the ball |q| < gamma."""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from domain.constants.model import GridKind, OperatorVariant, SolverMethod
from domain.exceptions import ConvergenceError, DomainViolationError
from domain.models.momentum_grid import MomentumGrid, MomentumGridFunction
from domain.models.species import SpeciesSpec
from domain.physics.asymptotics import limit_derivatives
from domain.physics.kinematics import velocity

RESIDUAL_TOLERANCE = 1e-10
# Systems up to this many unknowns are factorized directly in auto mode
DIRECT_SOLVE_LIMIT = 20_000
MAX_ITERATIONS = 5000
GMRES_RESTART = 200
REFINEMENT_SWEEPS = 3
REFINEMENT_FACTOR = 0.1

Offset = Tuple[int, int, int]
ScalarFn = Callable[[np.ndarray], np.ndarray]


def _unit(axis: int, sign: int) -> np.ndarray:
    e = np.zeros(3, dtype=int)
    e[axis] = sign
    return e


def _stencil_terms(q: np.ndarray, h: float,
                   variant: OperatorVariant = OperatorVariant.FULL) -> List[Tuple[Offset, np.ndarray]]:
    """
    19-point positive-type discretization of
    L u = sum_ij (q_i q_j - delta_ij) d_ij u + 6 q . grad u + 6 u
    at nodes q (m, 3): a list of (lattice offset, coefficient per node).

    Mixed derivatives use the diagonal pair along which q_i q_j keeps the stencil monotone.
    """
    q = np.asarray(q, dtype=float).reshape(-1, 3)
    h2 = h * h
    c_diag = 1.0 - q ** 2
    c_mixed = {(i, j): np.abs(q[:, i] * q[:, j]) for i in range(3) for j in range(i + 1, 3)}

    center = 2.0 * c_diag.sum(axis=1) / h2
    for coeff in c_mixed.values():
        center = center - 2.0 * coeff / h2
    if variant.zero_order:
        center = center + 6.0
    terms: List[Tuple[Offset, np.ndarray]] = [((0, 0, 0), center)]

    for i in range(3):
        off_diag = sum(c_mixed[tuple(sorted((i, j)))] for j in range(3) if j != i)
        second = -(c_diag[:, i] - off_diag) / h2
        for sign in (1, -1):
            coeff = second + (sign * 3.0 * q[:, i] / h if variant.first_order else 0.0)
            terms.append((tuple(_unit(i, sign)), coeff))

    for (i, j), coeff in c_mixed.items():
        opposite_sign_pair = q[:, i] * q[:, j] <= 0.0
        for si in (1, -1):
            for sj in (1, -1):
                uses = opposite_sign_pair if si * sj > 0 else ~opposite_sign_pair
                offset = tuple(_unit(i, si) + _unit(j, sj))
                terms.append((offset, np.where(uses, -coeff / h2, 0.0)))
    return terms


def apply_L(u: MomentumGridFunction, variant: OperatorVariant = OperatorVariant.FULL) -> MomentumGridFunction:
    """L u at every node not on the outer ring of the lattice (zero on that ring)."""
    grid = u.grid
    n = grid.nodes
    inner = (slice(1, n - 1),) * 3
    q = grid.mesh()[inner].reshape(-1, 3)
    values = u.values if u.is_vector else u.values[..., None]
    result = np.zeros_like(values)
    for offset, coeff in _stencil_terms(q, grid.spacing, variant):
        shifted = tuple(slice(1 + o, n - 1 + o) for o in offset)
        result[inner] += coeff.reshape((n - 2,) * 3)[..., None] * values[shifted]
    if not u.is_vector:
        result = result[..., 0]
    return MomentumGridFunction(grid, result, tag=f"L[{u.tag}]", species=u.species)


def apply_L_pointwise(fn: ScalarFn, q: np.ndarray, h: float,
                      variant: OperatorVariant = OperatorVariant.FULL) -> np.ndarray:
    """The same stencil applied to a callable at points q (m, 3)."""
    q = np.asarray(q, dtype=float).reshape(-1, 3)
    total = np.zeros(q.shape[0])
    for offset, coeff in _stencil_terms(q, h, variant):
        total += coeff * fn(q + h * np.asarray(offset, dtype=float))
    return total


def manufactured_profile(a: float, k: int) -> Tuple[ScalarFn, ScalarFn]:
    """
    u = (a - |q|^2)_+^k and its exact image under L.

    Returns:
        (u, L u) as callables on points (m, 3)
    """
    if k < 2:
        raise ValueError(f"manufactured profiles need k >= 2, got {k}")

    def u(q: np.ndarray) -> np.ndarray:
        w = a - np.einsum("...i,...i->...", q, q)
        return np.where(w > 0.0, np.maximum(w, 0.0) ** k, 0.0)

    def Lu(q: np.ndarray) -> np.ndarray:
        r2 = np.einsum("...i,...i->...", q, q)
        w = a - r2
        wp = np.maximum(w, 0.0)
        bracket = (-2.0 * k * (r2 - 3.0) * wp + 4.0 * k * (k - 1) * (r2 ** 2 - r2)
                   - 12.0 * k * r2 * wp + 6.0 * wp ** 2)
        return np.where(w > 0.0, wp ** (k - 2) * bracket, 0.0)

    return u, Lu


@dataclass
class EllipticProblem:
    """L u = source on |q| < gamma with u = 0 on every other lattice node."""
    gamma: float
    grid: MomentumGrid
    source: np.ndarray  # (n,n,n) or (n,n,n,c)
    variant: OperatorVariant = OperatorVariant.FULL
    solver: SolverMethod = SolverMethod.AUTO
    tolerance: float = RESIDUAL_TOLERANCE

    @classmethod
    def on_ball(cls, gamma: float, h: float, source: Callable[[np.ndarray], np.ndarray], **kwargs) -> "EllipticProblem":
        """Lattice of spacing h covering the ball plus one ghost ring, source evaluated on its nodes."""
        grid = MomentumGrid.from_spacing(gamma, h, kind=GridKind.VELOCITY, ghost=1)
        values = np.asarray(source(grid.mesh().reshape(-1, 3)), dtype=float)
        return cls(gamma=gamma, grid=grid, source=values.reshape(grid.shape + values.shape[1:]), **kwargs)

    @property
    def h(self) -> float:
        return self.grid.spacing

    @property
    def mask(self) -> np.ndarray:
        """Unknown (interior) nodes."""
        return self.grid.radius() < self.gamma

    @property
    def ellipticity_margin(self) -> float:
        return 1.0 - self.gamma ** 2


@dataclass
class _LinearSystem:
    matrix: sparse.csr_matrix
    index: np.ndarray  # lattice -> unknown number, -1 off the ball
    mask: np.ndarray
    history: Dict[int, List[float]] = field(default_factory=dict)


def assemble(problem: EllipticProblem) -> _LinearSystem:
    """Sparse matrix of the discrete operator restricted to the interior nodes."""
    if problem.ellipticity_margin <= 0.0:
        raise DomainViolationError(f"gamma = {problem.gamma} leaves no ellipticity margin")
    grid = problem.grid
    mask = problem.mask
    index = np.full(grid.shape, -1, dtype=np.int64)
    nodes = np.argwhere(mask)
    index[mask] = np.arange(nodes.shape[0])
    q = grid.mesh()[mask]
    rows, cols, data = [], [], []
    for offset, coeff in _stencil_terms(q, grid.spacing, problem.variant):
        neighbor = nodes + np.asarray(offset)
        target = index[neighbor[:, 0], neighbor[:, 1], neighbor[:, 2]]
        keep = (target >= 0) & (coeff != 0.0)
        rows.append(index[mask][keep])
        cols.append(target[keep])
        data.append(coeff[keep])
    size = nodes.shape[0]
    matrix = sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    ).tocsr()
    return _LinearSystem(matrix=matrix, index=index, mask=mask)


def _relative_residual(matrix, x: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(matrix @ x - b) / np.linalg.norm(b))


def _iterative(system: _LinearSystem, b: np.ndarray, method: SolverMethod, tolerance: float) -> Tuple[np.ndarray, List[float]]:
    matrix = system.matrix
    diagonal = matrix.diagonal()
    diagonal = np.where(diagonal != 0.0, diagonal, 1.0)
    preconditioner = sparse_linalg.LinearOperator(matrix.shape, matvec=lambda v: v / diagonal)
    history: List[float] = []

    def record(xk):
        history.append(_relative_residual(matrix, xk, b))

    def solve(kind: SolverMethod, x0: Optional[np.ndarray], rtol: float):
        if kind is SolverMethod.GMRES:
            return sparse_linalg.gmres(matrix, b, x0=x0, rtol=rtol, restart=GMRES_RESTART, maxiter=MAX_ITERATIONS,
                                       M=preconditioner, callback=record, callback_type="x")
        return sparse_linalg.bicgstab(matrix, b, x0=x0, rtol=rtol, maxiter=MAX_ITERATIONS,
                                      M=preconditioner, callback=record)

    x, info = solve(method, None, tolerance)
    history.append(_relative_residual(matrix, x, b))
    if info != 0 and method is SolverMethod.BICGSTAB:
        method = SolverMethod.GMRES
        x, info = solve(method, None, tolerance)
        history.append(_relative_residual(matrix, x, b))
    # Restarts from the current iterate until the true residual meets the tolerance
    for _ in range(REFINEMENT_SWEEPS):
        if history[-1] <= tolerance:
            break
        x, info = solve(method, x, tolerance * REFINEMENT_FACTOR)
        history.append(_relative_residual(matrix, x, b))
    return x, history


def _solve_columns(problem: EllipticProblem) -> Tuple[np.ndarray, List[float]]:
    """Solve every source component; returns values on the lattice and the final residuals."""
    system = assemble(problem)
    source = problem.source if problem.source.ndim == 4 else problem.source[..., None]
    rhs = source[system.mask]
    solution = np.zeros(problem.grid.shape + (rhs.shape[1],))
    residuals: List[float] = []
    method = problem.solver
    if method is SolverMethod.AUTO:
        method = SolverMethod.DIRECT if system.matrix.shape[0] <= DIRECT_SOLVE_LIMIT else SolverMethod.BICGSTAB
    factor = sparse_linalg.splu(system.matrix.tocsc()) if method is SolverMethod.DIRECT else None

    for column in range(rhs.shape[1]):
        b = rhs[:, column]
        if not np.any(b):
            residuals.append(0.0)
            continue
        if factor is not None:
            x = factor.solve(b)
            history = [_relative_residual(system.matrix, x, b)]
            for _ in range(REFINEMENT_SWEEPS):
                if history[-1] <= problem.tolerance:
                    break
                x = x + factor.solve(b - system.matrix @ x)
                history.append(_relative_residual(system.matrix, x, b))
        else:
            x, history = _iterative(system, b, method, problem.tolerance)
        residual = history[-1]
        if not residual <= problem.tolerance:
            raise ConvergenceError(
                f"{method.value} solve reached relative residual {residual:.3e} (target {problem.tolerance:.1e})",
                history,
            )
        solution[..., column][system.mask] = x
        residuals.append(residual)
    if problem.source.ndim == 3:
        solution = solution[..., 0]
    return solution, residuals


def solve_dirichlet(problem: EllipticProblem) -> MomentumGridFunction:
    """
    Solves L u = source with zero data off the ball, extended by zero.

    Returns:
        MomentumGridFunction with meta gamma, residual (max over components) and solver

    Raises:
        ConvergenceError: If the relative residual stays above the tolerance
        DomainViolationError: If gamma leaves no ellipticity margin
    """
    values, residuals = _solve_columns(problem)
    return MomentumGridFunction(problem.grid, values, tag="u", meta={
        "gamma": problem.gamma,
        "residual": max(residuals) if residuals else 0.0,
        "solver": problem.solver.value,
        "variant": problem.variant.value,
    })


def _resample(function: MomentumGridFunction, grid: MomentumGrid) -> np.ndarray:
    if function.grid == grid:
        return function.values
    points = grid.mesh().reshape(-1, 3)
    if function.is_vector:
        columns = [function.component(i).interpolate(points) for i in range(function.components)]
        return np.stack(columns, axis=-1).reshape(grid.shape + (function.components,))
    return function.interpolate(points).reshape(grid.shape)


def _limit_grid(source: MomentumGridFunction, gamma: float, h: Optional[float]) -> MomentumGrid:
    spacing = source.grid.spacing if h is None else h
    if h is None and source.grid.half_width >= gamma + spacing * (1.0 - 1e-9):
        return source.grid
    return MomentumGrid.from_spacing(gamma, spacing, kind=GridKind.VELOCITY, ghost=1)


def limit_E(rho_inf: MomentumGridFunction, j_inf: MomentumGridFunction, gamma: float, h: Optional[float] = None,
            solver: SolverMethod = SolverMethod.AUTO,
            variant: OperatorVariant = OperatorVariant.FULL) -> MomentumGridFunction:
    """E_inf: L E^i = -d_i rho_inf + 3 j^i + q . grad j^i on |q| < gamma, one solve per component."""
    source = limit_derivatives(rho_inf, j_inf).e_source
    grid = _limit_grid(source, gamma, h)
    result = solve_dirichlet(EllipticProblem(gamma, grid, _resample(source, grid), variant, solver))
    result.tag = "E_inf"
    return result


def limit_B(j_inf: MomentumGridFunction, gamma: float, h: Optional[float] = None,
            solver: SolverMethod = SolverMethod.AUTO,
            variant: OperatorVariant = OperatorVariant.FULL) -> MomentumGridFunction:
    """B_inf: L B^i = (curl j_inf)^i on |q| < gamma."""
    rho_dummy = MomentumGridFunction(j_inf.grid, np.zeros(j_inf.grid.shape))
    source = limit_derivatives(rho_dummy, j_inf).b_source
    grid = _limit_grid(source, gamma, h)
    result = solve_dirichlet(EllipticProblem(gamma, grid, _resample(source, grid), variant, solver))
    result.tag = "B_inf"
    return result


def K_infinity(p, species: SpeciesSpec, E_inf: MomentumGridFunction, B_inf: MomentumGridFunction,
               gamma: float) -> np.ndarray:
    """
    Limiting Lorentz force e (E_inf(v) + v x B_inf(v)) at v = v(p).

    Raises:
        DomainViolationError: If |v(p)| >= gamma
    """
    p = np.asarray(p, dtype=float)
    v = velocity(p, species)
    speed = np.linalg.norm(v, axis=-1)
    if np.any(speed >= gamma):
        raise DomainViolationError(
            f"velocity {float(np.max(speed)):.6g} is outside the limit-field ball of radius {gamma:.6g}"
        )
    points = v.reshape(-1, 3)
    E = np.stack([E_inf.component(i).interpolate(points) for i in range(3)], axis=-1)
    B = np.stack([B_inf.component(i).interpolate(points) for i in range(3)], axis=-1)
    force = species.charge * (E + np.cross(points, B))
    return force.reshape(p.shape)


@dataclass
class LimitForce:
    """E_inf, B_inf and their ball radius; call with (p, species) for K_inf."""
    E_inf: MomentumGridFunction
    B_inf: MomentumGridFunction
    gamma: float

    def __call__(self, p, species: SpeciesSpec) -> np.ndarray:
        return K_infinity(p, species, self.E_inf, self.B_inf, self.gamma)

    def sampler(self, species: SpeciesSpec) -> Callable[[np.ndarray], np.ndarray]:
        """K_inf of one species as a function of p alone."""
        return lambda p: self(p, species)

    @classmethod
    def zero(cls, grid: MomentumGrid, gamma: float) -> "LimitForce":
        zeros = np.zeros(grid.shape + (3,))
        return cls(MomentumGridFunction(grid, zeros, tag="E_inf"), MomentumGridFunction(grid, zeros.copy(), tag="B_inf"),
                   gamma)

    def sup(self) -> float:
        return max(self.E_inf.sup(), self.B_inf.sup())
