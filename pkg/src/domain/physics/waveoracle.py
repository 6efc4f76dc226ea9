"""Integral representations of the 3-D wave equation used as independent oracles.

The retarded solution of (d_t^2 - Laplacian) psi = eta with zero data is

    psi(t, x) = 1/(4 pi) * integral over |x - z| <= t of eta(t - |x - z|, z) / |x - z| dz,

evaluated here in retarded spherical shells z = x + r w, so the retarded time t - r is exact
on every shell. Kirchhoff's formula handles the homogeneous part.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from domain.constants.model import SolverMethod
from domain.exceptions import DomainViolationError, OutOfDomainError
from domain.models.momentum_grid import MomentumGridFunction
from domain.models.reports import GSReduction, LWaveReport, LWaveRow, QuadratureParams, QuadratureResult
from domain.physics.limitfields import EllipticProblem, apply_L, solve_dirichlet

FOUR_PI = 4.0 * math.pi
# Gauss nodes per panel for the change-of-variables quadratures
GS_ORDER = 24
# Panel breaks for u in mu = -1 + 2 u^2, refined toward the near-singular end
GS_U_BREAKS = (0.0, 1.0 / 256.0, 1.0 / 64.0, 1.0 / 16.0, 0.25, 1.0)
GS_GRADING_LEVELS = 8

ScalarField = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SourceFn:
    """eta(s, z) with declared support {|z| <= zeta s + L}; zero outside, and for s < 0."""
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    zeta: float
    L: float
    smoothness: str = "C2"

    def __call__(self, s, z) -> np.ndarray:
        s = np.asarray(s, dtype=float).reshape(-1)
        z = np.asarray(z, dtype=float).reshape(-1, 3)
        inside = (s >= 0.0) & (np.linalg.norm(z, axis=-1) <= self.zeta * s + self.L)
        values = np.zeros(s.shape)
        if inside.any():
            values[inside] = self.fn(s[inside], z[inside])
        return values

    @classmethod
    def zero(cls) -> "SourceFn":
        return cls(lambda s, z: np.zeros(s.shape), zeta=0.0, L=0.0)


def _gauss(order: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def _composite(breaks: Sequence[float], order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule of the given order on every panel [breaks[k], breaks[k+1]]."""
    xi, wi = _gauss(order)
    breaks = np.asarray(breaks, dtype=float)
    a = breaks[:-1, None]
    b = breaks[1:, None]
    nodes = 0.5 * (b - a) * xi[None, :] + 0.5 * (a + b)
    weights = 0.5 * (b - a) * wi[None, :]
    return nodes.ravel(), weights.ravel()


def _graded_breaks(a: float, b: float, focus: float, levels: int = GS_GRADING_LEVELS) -> List[float]:
    """Breakpoints of [a, b] accumulating geometrically at `focus` when it lies inside."""
    if not a < focus < b:
        return [a, b]
    left = [focus - (focus - a) * 2.0 ** -k for k in range(1, levels + 1)]
    right = [focus + (b - focus) * 2.0 ** -k for k in range(levels, 0, -1)]
    return [a] + left + [focus] + right + [b]


def sphere_rule(polar: int = 16, azimuth: int = 32) -> Tuple[np.ndarray, np.ndarray]:
    """Product rule on the unit sphere: Gauss in cos(theta), uniform in phi. Weights sum to 4 pi."""
    mu, w_mu = _gauss(polar)
    phi = 2.0 * np.pi * (np.arange(azimuth) + 0.5) / azimuth
    sin_theta = np.sqrt(1.0 - mu ** 2)
    directions = np.stack([
        np.outer(sin_theta, np.cos(phi)),
        np.outer(sin_theta, np.sin(phi)),
        np.outer(mu, np.ones(azimuth)),
    ], axis=-1).reshape(-1, 3)
    weights = np.outer(w_mu, np.full(azimuth, 2.0 * np.pi / azimuth)).ravel()
    return directions, weights


def _radial_range(eta: SourceFn, t: float, distance: float) -> Tuple[float, float]:
    """Shell radii whose sphere meets the source support at the retarded time."""
    if eta.zeta < 1.0:
        lo = max(0.0, (distance - eta.zeta * t - eta.L) / (1.0 - eta.zeta))
    else:
        lo = 0.0
    hi = min(t, (eta.zeta * t + eta.L + distance) / (1.0 + eta.zeta))
    return lo, hi


def retarded_solution(eta: SourceFn, t: float, x, params: Optional[QuadratureParams] = None) -> QuadratureResult:
    """
    Retarded potential at (t, x) by shell quadrature with panel doubling.

    Args:
        eta: Source with its support envelope
        t: Time (> 0)
        x: Point in space
        params: Quadrature settings

    Returns:
        QuadratureResult; `error` is the difference of the last two panel levels
    """
    if t <= 0:
        raise DomainViolationError(f"retarded solution needs t > 0, got {t}")
    params = params or QuadratureParams()
    x = np.asarray(x, dtype=float).reshape(3)
    lo, hi = _radial_range(eta, t, float(np.linalg.norm(x)))
    if hi <= lo:
        return QuadratureResult(value=0.0, error=0.0, converged=True, evaluations=0)
    directions, sphere_weights = sphere_rule(params.polar_nodes, params.azimuth_nodes)
    evaluations = 0

    def shells(panels: int) -> float:
        nonlocal evaluations
        r, w = _composite(np.linspace(lo, hi, panels + 1), params.radial_order)
        z = x[None, None, :] + r[:, None, None] * directions[None, :, :]
        s = np.broadcast_to((t - r)[:, None], z.shape[:2])
        values = eta(s, z.reshape(-1, 3)).reshape(z.shape[:2])
        evaluations += values.size
        return float((w * r) @ (values @ sphere_weights)) / FOUR_PI

    panels = params.initial_panels
    previous = shells(panels)
    error = math.inf
    current = previous
    for _ in range(params.max_levels):
        panels *= 2
        current = shells(panels)
        error = abs(current - previous)
        if error <= max(params.atol, params.rtol * abs(current)):
            return QuadratureResult(value=current, error=error, converged=True, evaluations=evaluations)
        previous = current
    return QuadratureResult(value=current, error=error, converged=False, evaluations=evaluations)


def _fd_gradient(fn: ScalarField, z: np.ndarray, step: float) -> np.ndarray:
    columns = []
    for axis in range(3):
        e = np.zeros(3)
        e[axis] = step
        columns.append((fn(z + e) - fn(z - e)) / (2.0 * step))
    return np.stack(columns, axis=-1)


def kirchhoff_homogeneous(psi0: ScalarField, psi1: ScalarField, t: float, x,
                          params: Optional[QuadratureParams] = None,
                          grad_psi0: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                          fd_step: float = 1e-5) -> float:
    """
    Solution of the homogeneous wave equation with data (psi0, psi1) at (t, x):
    1/(4 pi) * sphere integral of psi0 + t grad psi0 . w + t psi1 over z = x + t w.
    """
    if t <= 0:
        raise DomainViolationError(f"Kirchhoff formula needs t > 0, got {t}")
    params = params or QuadratureParams()
    directions, weights = sphere_rule(params.polar_nodes, params.azimuth_nodes)
    z = np.asarray(x, dtype=float).reshape(1, 3) + t * directions
    gradient = grad_psi0(z) if grad_psi0 is not None else _fd_gradient(psi0, z, fd_step)
    integrand = psi0(z) + t * np.einsum("ij,ij->i", gradient, directions) + t * psi1(z)
    return float(weights @ integrand) / FOUR_PI


def gs_reduction_check(Phi: Callable[[np.ndarray, np.ndarray], np.ndarray],
                       Psi: Callable[[np.ndarray], np.ndarray], y, s: float) -> GSReduction:
    """
    Both sides of the change of variables

        integral over |y - z| <= s of Phi(s - |y - z|, |z|) Psi(|y - z|) dz
        = (2 pi / |y|) int_0^s int_{|s - |y| - tau|}^{s + |y| - tau} Phi(tau, l) l dl (s - tau) Psi(s - tau) dtau

    The left side is integrated around y in shells sigma = |y - z| with mu = -1 + 2u^2 along the
    axis of y, graded toward sigma = |y| where |z| has a kink.

    Raises:
        DomainViolationError: If s <= 0 or y = 0
    """
    y = np.asarray(y, dtype=float).reshape(3)
    ry = float(np.linalg.norm(y))
    if s <= 0 or ry == 0.0:
        raise DomainViolationError(f"change of variables needs s > 0 and y != 0, got s={s}, |y|={ry}")

    sigma, w_sigma = _composite(_graded_breaks(0.0, s, ry), GS_ORDER)
    u, w_u = _composite(GS_U_BREAKS, GS_ORDER)
    distance = np.sqrt((ry - sigma[:, None]) ** 2 + 4.0 * ry * sigma[:, None] * u[None, :] ** 2)
    inner = 2.0 * np.pi * (Phi(np.broadcast_to(s - sigma[:, None], distance.shape), distance) @ (4.0 * u * w_u))
    lhs = float(w_sigma @ (sigma ** 2 * Psi(sigma) * inner))

    tau, w_tau = _composite(_graded_breaks(0.0, s, s - ry), GS_ORDER)
    xi, w_xi = _gauss(GS_ORDER)
    a = np.abs(s - ry - tau)[:, None]
    b = (s + ry - tau)[:, None]
    lam = 0.5 * (b - a) * xi[None, :] + 0.5 * (a + b)
    inner_rhs = (Phi(np.broadcast_to(tau[:, None], lam.shape), lam) * lam) @ w_xi * 0.5 * (b - a)[:, 0]
    rhs = float(2.0 * np.pi / ry * (w_tau @ ((s - tau) * Psi(s - tau) * inner_rhs)))
    return GSReduction(lhs=lhs, rhs=rhs)


def _as_callables(psi_inf: Union[MomentumGridFunction, ScalarField],
                  L_psi_inf: Optional[ScalarField]) -> Tuple[ScalarField, ScalarField]:
    if isinstance(psi_inf, MomentumGridFunction):
        image = apply_L(psi_inf)
        u = lambda q: psi_inf.interpolate(q, method="cubic")
        Lu = L_psi_inf or (lambda q: image.interpolate(q, method="cubic"))
        return u, Lu
    if L_psi_inf is None:
        raise ValueError("a callable psi_inf needs its image L_psi_inf")
    return psi_inf, L_psi_inf


def self_similar_residual(psi_inf: Union[MomentumGridFunction, ScalarField], t: float, x, step: float,
                          gamma: float, L_psi_inf: Optional[ScalarField] = None,
                          drop_zero_order: bool = False) -> float:
    """
    t^4 box[t^-2 psi_inf(x/t)] - (L psi_inf)(x/t) with central differences of width `step`.

    Args:
        psi_inf: Lattice function or callable on points (m, 3)
        t: Time
        x: Point with |x| < gamma t
        step: Finite-difference step in t and x
        gamma: Radius of the ball where psi_inf is defined
        L_psi_inf: Exact image under L (required for callables)
        drop_zero_order: Compare with L minus its 6u term

    Raises:
        OutOfDomainError: If the difference stencil leaves the cone |x| < gamma t
    """
    x = np.asarray(x, dtype=float).reshape(3)
    if step <= 0 or t - step <= 0 or np.linalg.norm(x) + step >= gamma * (t - step):
        raise OutOfDomainError(f"difference stencil at t={t:.6g}, |x|={np.linalg.norm(x):.6g} leaves the cone")
    u, Lu = _as_callables(psi_inf, L_psi_inf)

    def psi(time: float, points: np.ndarray) -> np.ndarray:
        return u(points / time) / time ** 2

    centre = psi(t, x[None, :])[0]
    box = (psi(t + step, x[None, :])[0] - 2.0 * centre + psi(t - step, x[None, :])[0]) / step ** 2
    offsets = np.vstack([np.eye(3), -np.eye(3)]) * step
    box -= (psi(t, x[None, :] + offsets).sum() - 6.0 * centre) / step ** 2
    q = (x / t)[None, :]
    target = Lu(q)[0]
    if drop_zero_order:
        target -= 6.0 * u(q)[0]
    return float(t ** 4 * box - target)


def smoothstep(s: np.ndarray) -> np.ndarray:
    """C2 step 6s^5 - 15s^4 + 10s^3 clipped to [0, 1]."""
    s = np.clip(s, 0.0, 1.0)
    return s ** 3 * (10.0 - 15.0 * s + 6.0 * s ** 2)


def self_similar_source(eta_inf: ScalarField, zeta_prime: float, t_shift: float = 1.0,
                        cutoff_width: float = 0.5) -> SourceFn:
    """
    eta(s, z) = (s + t0)^-4 eta_inf(z / (s + t0)) times a C2 cutoff that is 1 on |z| <= zeta' (s + t0)
    and 0 beyond zeta' (s + t0) + cutoff_width.
    """
    def fn(s: np.ndarray, z: np.ndarray) -> np.ndarray:
        clock = s + t_shift
        radius = np.linalg.norm(z, axis=-1)
        inner = zeta_prime * clock
        cutoff = smoothstep((inner + cutoff_width - radius) / cutoff_width)
        return clock ** -4 * eta_inf(z / clock[:, None]) * cutoff

    return SourceFn(fn, zeta=zeta_prime, L=zeta_prime * t_shift + cutoff_width)


def default_lwave_samples(gamma: float) -> np.ndarray:
    """Fixed self-similar sample points q: the origin, the axes at 0.4 gamma, the diagonals at 0.8 gamma."""
    axes = np.vstack([np.eye(3), -np.eye(3)]) * 0.4 * gamma
    signs = np.array([[a, b, c] for a in (1, -1) for b in (1, -1) for c in (1, -1)], dtype=float)
    diagonals = signs / math.sqrt(3.0) * 0.8 * gamma
    return np.vstack([np.zeros((1, 3)), axes, diagonals])


def lwave_check(eta_inf: ScalarField, gamma: float, times: Sequence[float] = (4.0, 8.0, 16.0),
                zeta_prime: float = 0.4, h: Optional[float] = None, samples: Optional[np.ndarray] = None,
                params: Optional[QuadratureParams] = None, t_shift: float = 1.0, cutoff_width: float = 0.5,
                workers: int = 1, solver: SolverMethod = SolverMethod.AUTO) -> LWaveReport:
    """
    Compares t^2 psi(t, t q) with psi_inf(q), where psi solves the wave equation with the
    self-similar source and zero data and L psi_inf = eta_inf on |q| < gamma.

    Returns:
        LWaveReport with the sup error per time and the dyadic ratios; passed when the
        error decreases at every doubling (or everything vanishes)
    """
    if zeta_prime >= gamma:
        raise DomainViolationError(f"source radius {zeta_prime} must be below gamma {gamma}")
    h = h or gamma / 20.0
    psi_inf = solve_dirichlet(EllipticProblem.on_ball(gamma, h, eta_inf, solver=solver))
    psi_sup = psi_inf.sup()
    q = default_lwave_samples(gamma) if samples is None else np.asarray(samples, dtype=float).reshape(-1, 3)
    if np.any(np.linalg.norm(q, axis=-1) > 0.8 * gamma * (1.0 + 1e-12)):
        raise OutOfDomainError("lwave samples must satisfy |q| <= 0.8 gamma")
    reference = psi_inf.interpolate(q, method="cubic")
    source = self_similar_source(eta_inf, zeta_prime, t_shift, cutoff_width)

    rows: List[LWaveRow] = []
    for t in times:
        points = [t * point for point in q]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda point: retarded_solution(source, t, point, params), points))
        else:
            results = [retarded_solution(source, t, point, params) for point in points]
        values = np.array([r.value for r in results])
        errors = np.abs(t ** 2 * values - reference)
        rows.append(LWaveRow(
            t=float(t),
            sup_err=float(errors.max()),
            n_samples=len(points),
            quadrature_err_max=float(t ** 2 * max(r.error for r in results)),
        ))
    ratios = [b.sup_err / a.sup_err for a, b in zip(rows, rows[1:]) if a.sup_err > 0]
    exact = psi_sup == 0.0 and all(row.sup_err == 0.0 for row in rows)
    passed = exact or (len(ratios) == len(rows) - 1 and len(ratios) >= 1 and all(r < 1.0 for r in ratios))
    return LWaveReport(rows=rows, doubling_ratios=ratios, exact=exact, passed=passed, psi_inf_sup=psi_sup)
