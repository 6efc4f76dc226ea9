"""Manufactured-solution and closed-form checks run by the verify and oracle stages."""
import math
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from domain.constants.model import OperatorVariant, SolverMethod, VelocityModel
from domain.models.field_grid import GridGeometry
from domain.models.initial_data import bump
from domain.models.reports import CheckResult, QuadratureParams
from domain.models.species import SpeciesSpec
from domain.models.trajectory import TrajectoryState
from domain.physics.characteristics import integrate, uniform_field_sampler
from domain.physics.kinematics import inv_det_D, jacobian_A, jacobian_B, velocity
from domain.physics.limitfields import EllipticProblem, manufactured_profile, solve_dirichlet
from domain.physics.maxwell import scalar_wave_leapfrog
from domain.physics.waveoracle import (
    SourceFn,
    gs_reduction_check,
    kirchhoff_homogeneous,
    lwave_check,
    retarded_solution,
    self_similar_residual,
)

# Minimal observed order of the second-order schemes
MIN_ORDER = 1.8

Params = Mapping[str, str]


def _float(params: Params, key: str, default: float) -> float:
    return float(params[key]) if key in params else default


def _int(params: Params, key: str, default: int) -> int:
    return int(params[key]) if key in params else default


def _orders(errors) -> list:
    return [math.log2(a / b) if a > 0 and b > 0 else math.inf for a, b in zip(errors, errors[1:])]


def check_kinematics(params: Params, fast: bool = False, corrupt: bool = False) -> CheckResult:
    """B(v(p)) A(p) = I and |det A| D = 1 on random momenta, for both velocity maps."""
    samples = _int(params, "samples", 1000)
    tolerance = _float(params, "tol", 1e-10)
    rng = np.random.default_rng(_int(params, "seed", 2024))
    p = rng.normal(size=(samples, 3)) * _float(params, "scale", 2.0)
    details: Dict[str, float] = {}
    passed = True
    for model in VelocityModel:
        species = SpeciesSpec(mass=_float(params, "mass", 1.0), model=model, support_p=0.5)
        A = jacobian_A(p, species)
        product = jacobian_B(velocity(p, species), species) @ A
        inverse_error = float(np.max(np.abs(product - np.eye(3))))
        det_error = float(np.max(np.abs(np.abs(np.linalg.det(A)) * inv_det_D(p, species) - 1.0)))
        details[f"{model.value}_inverse_error"] = inverse_error
        details[f"{model.value}_det_error"] = det_error
        passed &= inverse_error <= tolerance and det_error <= tolerance
    return CheckResult(name="kinematics", passed=passed, details=details)


def check_gs_reduction(params: Params, fast: bool = False, corrupt: bool = False) -> CheckResult:
    """Change-of-variables identity on the ball-volume case and on random smooth pairs."""
    tolerance = _float(params, "tol", 1e-5)
    pairs = _int(params, "pairs", 3 if fast else 10)
    rng = np.random.default_rng(_int(params, "seed", 7))
    s = 1.5
    ball = gs_reduction_check(lambda tau, l: np.ones_like(l), lambda sigma: np.ones_like(sigma),
                              np.array([0.3, 0.2, 0.1]), s)
    exact = 4.0 / 3.0 * math.pi * s ** 3
    worst = max(abs(ball.lhs - exact), abs(ball.rhs - exact)) / exact
    details = {"ball_relative_error": worst}
    for k in range(pairs):
        a, b, c = rng.uniform(0.2, 2.0, size=3)
        s_k = float(rng.uniform(0.5, 2.0))
        direction = rng.normal(size=3)
        y = direction / np.linalg.norm(direction) * rng.uniform(0.1, 0.9) * s_k
        result = gs_reduction_check(
            lambda tau, l, a=a, b=b: np.exp(-a * l ** 2) * (1.0 + b * tau),
            lambda sigma, c=c: 1.0 + c * sigma ** 2,
            y, s_k,
        )
        details[f"pair_{k}_relative_diff"] = result.relative_diff
        worst = max(worst, result.relative_diff)
    details["worst"] = worst
    return CheckResult(name="gs_reduction", passed=worst <= tolerance, details=details)


def check_self_similar(params: Params, fast: bool = False, corrupt: bool = False) -> CheckResult:
    """
    Residual of box[t^-2 u(x/t)] - t^-4 (L u)(x/t) under step halving for a manufactured u.

    The negative control drops the 6u term and must not converge; `corrupt` drops it from the
    main study as well.
    """
    gamma = _float(params, "gamma", 0.6)
    t = _float(params, "t", 2.0)
    points = _int(params, "points", 10 if fast else 50)
    steps = (0.04, 0.02, 0.01)
    u, Lu = manufactured_profile(_float(params, "a", 0.25), _int(params, "k", 4))
    rng = np.random.default_rng(_int(params, "seed", 11))
    directions = rng.normal(size=(points, 3))
    radii = 0.4 * rng.uniform(size=points) ** (1.0 / 3.0)
    x = t * directions / np.linalg.norm(directions, axis=-1)[:, None] * radii[:, None]

    def study(drop: bool):
        return [max(abs(self_similar_residual(u, t, point, h, gamma, Lu, drop_zero_order=drop)) for point in x)
                for h in steps]

    control = study(True)
    full = study(False)
    residuals = control if corrupt else full
    orders = _orders(residuals)
    converged = all(order >= MIN_ORDER for order in orders)
    control_flat = control[-1] >= 0.5 * control[0] and control[-1] > 10.0 * full[-1]
    return CheckResult(name="self_similar", passed=converged and control_flat, details={
        "residuals": residuals, "orders": orders, "negative_control": control,
    })


def check_elliptic(params: Params, fast: bool = False, corrupt: bool = False) -> CheckResult:
    """Manufactured convergence, zero-source solve and the sign of the principal-part solution."""
    gamma = _float(params, "gamma", 0.5)
    k = _int(params, "k", 3)
    solver = SolverMethod.from_str(params.get("solver", ""))
    divisions = (8, 16, 32) if fast else (16, 32, 64)
    u, Lu = manufactured_profile(gamma ** 2, k)
    errors = []
    for n in divisions:
        solution = solve_dirichlet(EllipticProblem.on_ball(gamma, gamma / n, Lu, solver=solver))
        exact = u(solution.grid.mesh().reshape(-1, 3)).reshape(solution.grid.shape)
        errors.append(float(np.max(np.abs(solution.values - exact))))
    orders = _orders(errors)

    h = gamma / divisions[0]
    zero = solve_dirichlet(EllipticProblem.on_ball(gamma, h, lambda q: np.zeros(q.shape[0]), solver=solver))
    positive = solve_dirichlet(EllipticProblem.on_ball(
        gamma, h, lambda q: bump(np.linalg.norm(q, axis=-1) / (0.5 * gamma)),
        variant=OperatorVariant.PRINCIPAL, solver=solver,
    ))
    minimum = float(positive.values.min())
    passed = all(order >= MIN_ORDER for order in orders) and zero.sup() == 0.0 and minimum >= -1e-12
    return CheckResult(name="elliptic", passed=passed, details={
        "h": [gamma / n for n in divisions], "errors": errors, "orders": orders,
        "zero_source_sup": zero.sup(), "principal_min": minimum,
    })


def check_lwave(params: Params, fast: bool = False, corrupt: bool = False) -> CheckResult:
    """Wave solution with the self-similar source against the elliptic limit, plus the zero source."""
    gamma = _float(params, "gamma", 0.6)
    _, eta_inf = manufactured_profile(_float(params, "a", 0.16), _int(params, "k", 5))
    if fast:
        times, samples = (2.0, 4.0, 8.0), np.zeros((1, 3))
        quadrature = QuadratureParams(radial_order=6, polar_nodes=12, azimuth_nodes=24, rtol=1e-7)
    else:
        times, samples, quadrature = (4.0, 8.0, 16.0), None, QuadratureParams()
    workers = _int(params, "workers", 1)
    report = lwave_check(eta_inf, gamma, times=times, zeta_prime=_float(params, "zeta_prime", 0.4),
                         samples=samples, params=quadrature, workers=workers)
    zero = lwave_check(lambda q: np.zeros(np.asarray(q).shape[0]), gamma, times=times[:2],
                       samples=np.zeros((1, 3)), params=quadrature)
    return CheckResult(name="lwave", passed=report.passed and zero.exact, details={
        "rows": [row.model_dump() for row in report.rows],
        "doubling_ratios": report.doubling_ratios,
        "psi_inf_sup": report.psi_inf_sup,
        "zero_source_exact": zero.exact,
    })


def check_pusher(params: Params, fast: bool = False, corrupt: bool = False) -> CheckResult:
    """Order of the kick-drift-kick pusher in a uniform E field, and |p| under a pure B rotation."""
    field = _float(params, "E", 1.0)
    T = _float(params, "T", 2.0)
    species = SpeciesSpec(mass=1.0, charge=1.0)
    start = TrajectoryState(np.zeros(3), np.zeros(3), 0.0, species)
    sampler = uniform_field_sampler(lambda t: (field, 0.0, 0.0))
    exact = (math.sqrt(1.0 + (field * T) ** 2) - 1.0) / field
    errors = []
    for dt in (0.2, 0.1, 0.05) if fast else (0.1, 0.05, 0.025, 0.0125):
        record = integrate(start, sampler, T, dt)
        errors.append(abs(float(record.X[-1, 0]) - exact))
    orders = _orders(errors)

    rotation = uniform_field_sampler(lambda t: (0.0, 0.0, 0.0), lambda t: (0.0, 0.0, 3.0))
    spin = integrate(TrajectoryState(np.zeros(3), np.array([0.7, 0.2, -0.1]), 0.0, species), rotation, T, 0.05)
    norms = np.linalg.norm(spin.P, axis=-1)
    drift = float(np.max(np.abs(norms - norms[0])))
    passed = all(order >= MIN_ORDER for order in orders) and drift <= 1e-12
    return CheckResult(name="pusher", passed=passed, details={"errors": errors, "orders": orders, "norm_drift": drift})


def _radial_kirchhoff(radius: float, t: float) -> float:
    """Value at the origin for psi0 = (1 - r^2/R^2)^3, psi1 = 0: f(t) + t f'(t)."""
    w = 1.0 - (t / radius) ** 2
    return w ** 3 - 6.0 * t ** 2 / radius ** 2 * w ** 2


def check_kirchhoff(params: Params, fast: bool = False, corrupt: bool = False) -> CheckResult:
    """Kirchhoff formula against the radial closed form, and the scalar leapfrog against Kirchhoff."""
    radius = _float(params, "R", 2.0)
    t = _float(params, "t", 0.5)

    def psi0(z: np.ndarray) -> np.ndarray:
        return bump(np.linalg.norm(z, axis=-1) / radius)

    def psi1(z: np.ndarray) -> np.ndarray:
        return np.zeros(z.shape[0])

    quadrature = QuadratureParams(polar_nodes=24, azimuth_nodes=48)
    exact = _radial_kirchhoff(radius, t)
    value = kirchhoff_homogeneous(psi0, psi1, t, np.zeros(3), quadrature)
    details = {"exact": exact, "kirchhoff": value, "kirchhoff_error": abs(value - exact)}
    passed = abs(value - exact) <= _float(params, "tol", 1e-8)
    if not fast:
        cells = _int(params, "cells", 96)
        geometry = GridGeometry(extent=radius + t + 0.5, cells=cells)
        steps = _int(params, "steps", 16)
        mesh = np.stack(geometry.mesh(), axis=-1)
        psi = scalar_wave_leapfrog(psi0(mesh.reshape(-1, 3)).reshape(geometry.node_shape), geometry, t / steps, steps)
        centre = cells // 2
        reference = kirchhoff_homogeneous(psi0, psi1, t, np.zeros(3), quadrature)
        leapfrog_error = abs(float(psi[centre, centre, centre]) - reference) / abs(reference)
        details["leapfrog_relative_error"] = leapfrog_error
        passed &= leapfrog_error <= _float(params, "leapfrog_tol", 0.02)
    return CheckResult(name="kirchhoff", passed=passed, details=details)


def check_retarded(params: Params, fast: bool = False, corrupt: bool = False) -> CheckResult:
    """Retarded potential of a static bump (R^2/8 at the centre once t >= R) and of the zero source."""
    radius = _float(params, "R", 1.0)
    t = _float(params, "t", 2.0 * radius)
    source = SourceFn(lambda s, z: bump(np.linalg.norm(z, axis=-1) / radius), zeta=0.0, L=radius)
    result = retarded_solution(source, t, np.zeros(3), QuadratureParams(rtol=1e-10))
    exact = radius ** 2 / 8.0
    zero = retarded_solution(SourceFn.zero(), t, np.array([0.1, 0.0, 0.0]))
    error = abs(result.value - exact) / exact
    return CheckResult(name="retarded", passed=error <= _float(params, "tol", 1e-6) and zero.value == 0.0, details={
        "value": result.value, "exact": exact, "relative_error": error,
        "converged": result.converged, "zero_source": zero.value,
    })


CheckFn = Callable[[Params, bool, bool], CheckResult]

CHECKS: Dict[str, CheckFn] = {
    "kinematics": check_kinematics,
    "gs_reduction": check_gs_reduction,
    "self_similar": check_self_similar,
    "elliptic": check_elliptic,
    "lwave": check_lwave,
    "pusher": check_pusher,
    "kirchhoff": check_kirchhoff,
    "retarded": check_retarded,
}

# Checks run by `verify`; kirchhoff and retarded are available through `oracle`
SUITE = ("kinematics", "gs_reduction", "self_similar", "elliptic", "lwave", "pusher")


def get_check(name: str) -> Optional[CheckFn]:
    return CHECKS.get(name)
