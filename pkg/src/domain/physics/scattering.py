"""Regime classification and scattering-label statistics of a completed run."""
import math
from typing import Callable, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from domain.constants.regime import Regime
from domain.exceptions import InsufficientDataError
from domain.models.momentum_grid import MomentumGridFunction
from domain.models.reports import DecayFit, DyadicTable, PRateFit, ScatteringReport
from domain.models.species import SpeciesSpec
from domain.models.trajectory import TracerRecord
from domain.physics.asymptotics import dyadic_report
from domain.physics.characteristics import scattering_label
from domain.physics.kinematics import jacobian_A

# Relative size below which dyadic label or momentum differences count as exactly zero
EXACT_RELATIVE = 1e-12
MIN_DOUBLINGS = 3

# species -> K_inf as a function of p
ForceProvider = Callable[[SpeciesSpec], Callable[[np.ndarray], np.ndarray]]


def _zero_force(species: SpeciesSpec) -> Callable[[np.ndarray], np.ndarray]:
    return lambda p: np.zeros_like(np.asarray(p, dtype=float))


def volume_scale(gamma: float) -> float:
    """Volume of the ball |q| < gamma, the support of the velocity-space limits."""
    return 4.0 / 3.0 * math.pi * gamma ** 3


def classify_regime(rho_inf: MomentumGridFunction, field_fits: Iterable[DecayFit], total_mass: float,
                    gamma: float, vanish_tol: float = 1e-3, field_exponent_cut: float = -2.5) -> Regime:
    """
    Vanishing when sup|rho_inf| <= vanish_tol * M/|B_gamma| and every cone field norm decays at
    least like t^field_exponent_cut; nonvanishing when neither holds; undetermined otherwise.

    Without field fits the regime is undetermined.
    """
    small = rho_inf.sup() <= vanish_tol * total_mass / volume_scale(gamma)
    fits = list(field_fits)
    if not fits:
        return Regime.UNDETERMINED
    fast = all(fit.exact_zero or (fit.exponent is not None and fit.exponent <= field_exponent_cut) for fit in fits)
    if small and fast:
        return Regime.VANISHING
    if not small and not fast:
        return Regime.NONVANISHING
    return Regime.UNDETERMINED


def dyadic_times(times: Sequence[float], start: float = 1.0) -> List[float]:
    """Record times forming the chain T, 2T, 4T, ... from the first record time >= start."""
    times = np.asarray(times, dtype=float)
    candidates = times[times >= start * (1.0 - 1e-12)]
    if candidates.size == 0:
        return []
    chain = [float(candidates[0])]
    while True:
        target = 2.0 * chain[-1]
        match = np.flatnonzero(np.isclose(times, target, rtol=1e-9, atol=0.0))
        if match.size == 0:
            return chain
        chain.append(float(times[match[0]]))


def _exact(values: Sequence[float], scale: float) -> bool:
    return all(v <= EXACT_RELATIVE * (1.0 + scale) for v in values)


def h_convergence(records: Sequence[TracerRecord], forces: Optional[ForceProvider], times: Sequence[float],
                  p_inf: Optional[Mapping[int, np.ndarray]] = None, quantity: str = "label") -> DyadicTable:
    """
    S(T) = max over tracers of |label(2T) - label(T)| along a dyadic time chain.

    Args:
        records: Tracer histories sampled at least at the dyadic times
        forces: K_inf per species; None gives uncorrected labels X - v(P_inf) t
        times: Dyadic chain T, 2T, 4T, ... (all >= 1)
        p_inf: Limiting momentum per tracer id (defaults to the final momentum)
        quantity: Table name

    Raises:
        InsufficientDataError: With fewer than 3 doublings or no tracers
    """
    if not records:
        raise InsufficientDataError("h_convergence needs tracer records")
    if len(times) < MIN_DOUBLINGS + 1:
        raise InsufficientDataError(
            f"h_convergence needs {MIN_DOUBLINGS} doublings, the dyadic chain has {max(len(times) - 1, 0)}"
        )
    forces = forces or _zero_force
    statistic = np.zeros(len(times) - 1)
    scale = 0.0
    for record in records:
        limit = record.P[-1] if p_inf is None else p_inf.get(record.tracer_id, record.P[-1])
        label_times, labels = scattering_label(record, forces(record.species), limit)
        at = [int(np.argmin(np.abs(label_times - t))) for t in times]
        chain = labels[at]
        scale = max(scale, float(np.max(np.abs(chain))))
        statistic = np.maximum(statistic, np.linalg.norm(chain[1:] - chain[:-1], axis=-1))
    table = dyadic_report(times[:-1], statistic, quantity)
    table.exact = _exact(statistic, scale)
    return table


def label_gap(records: Sequence[TracerRecord], forces: ForceProvider,
              p_inf: Optional[Mapping[int, np.ndarray]] = None) -> float:
    """(ln 2) * min over tracers of |A(P_inf) K_inf(P_inf)|: the per-doubling drift of uncorrected labels."""
    if not records:
        return 0.0
    drifts = []
    for record in records:
        limit = record.P[-1] if p_inf is None else p_inf.get(record.tracer_id, record.P[-1])
        limit = np.asarray(limit, dtype=float)
        correction = jacobian_A(limit, record.species) @ np.asarray(forces(record.species)(limit), dtype=float)
        drifts.append(float(np.linalg.norm(correction)))
    return math.log(2.0) * min(drifts)


def momentum_differences(records: Sequence[TracerRecord], times: Sequence[float]) -> np.ndarray:
    """max over tracers of |P(2T) - P(T)| along a dyadic chain."""
    differences = np.zeros(max(len(times) - 1, 0))
    for record in records:
        chain = record.P[[record.at(t) for t in times]]
        differences = np.maximum(differences, np.linalg.norm(chain[1:] - chain[:-1], axis=-1))
    return differences


def p_infinity_rate(records: Sequence[TracerRecord], regime: Regime, times: Sequence[float],
                    nonvanishing_rate: float = -1.0, rate_tol: float = 0.3,
                    vanishing_rate: float = -1.5) -> PRateFit:
    """
    Log-log slope of |P(2T) - P(T)| against T with the regime's expected rate.

    Nonvanishing runs expect nonvanishing_rate +- rate_tol, vanishing runs a slope at most
    vanishing_rate; identically vanishing differences count as exact convergence.

    Raises:
        InsufficientDataError: With fewer than 3 doublings or no tracers
    """
    if not records:
        raise InsufficientDataError("p_infinity_rate needs tracer records")
    if len(times) < MIN_DOUBLINGS + 1:
        raise InsufficientDataError(
            f"p_infinity_rate needs {MIN_DOUBLINGS} doublings, the dyadic chain has {max(len(times) - 1, 0)}"
        )
    differences = momentum_differences(records, times)
    table = dyadic_report(times[:-1], differences, "P_doubling")
    scale = max(float(np.max(np.abs(r.P))) for r in records)
    if _exact(differences, scale):
        table.exact = True
        return PRateFit(regime=regime, table=table, exact=True, expected="exact", passed=True)

    positive = differences > 0
    slope = None
    if positive.sum() >= 2:
        t = np.asarray(times[:-1], dtype=float)[positive]
        design = np.column_stack([np.ones(t.size), np.log(t)])
        coeffs, *_ = np.linalg.lstsq(design, np.log(differences[positive]), rcond=None)
        slope = float(coeffs[1])

    if regime is Regime.NONVANISHING:
        expected = f"{nonvanishing_rate:g} +- {rate_tol:g}"
        passed = slope is not None and abs(slope - nonvanishing_rate) <= rate_tol
    elif regime is Regime.VANISHING:
        expected = f"<= {vanishing_rate:g}"
        passed = slope is not None and slope <= vanishing_rate
    else:
        expected = "< 0"
        passed = slope is not None and slope < 0.0
    return PRateFit(regime=regime, table=table, slope=slope, expected=expected, passed=passed)


def assemble_report(regime: Regime, tables: Mapping[str, DyadicTable], fits: Mapping[str, DecayFit],
                    verdicts: Mapping[str, bool], metrics: Mapping[str, float],
                    thresholds: Mapping[str, object], notes: Sequence[str] = ()) -> ScatteringReport:
    """Bundle the analysis outputs; keys are sorted so equal inputs give equal reports."""
    return ScatteringReport(
        regime=regime,
        tables={k: tables[k] for k in sorted(tables)},
        fits={k: fits[k] for k in sorted(fits)},
        verdicts={k: bool(verdicts[k]) for k in sorted(verdicts)},
        metrics={k: float(metrics[k]) for k in sorted(metrics)},
        thresholds={k: thresholds[k] for k in sorted(thresholds)},
        notes=list(notes),
    )
