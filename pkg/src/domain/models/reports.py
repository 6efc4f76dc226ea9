"""Report models emitted by the analysis and verification stages."""
import math
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from domain.constants.regime import Regime


class DyadicRow(BaseModel):
    """Value of a monitored quantity at one dyadic time."""
    t: float
    value: float
    ratio: Optional[float] = None  # value / previous value
    scaled: Optional[float] = None  # value with the expected rate divided out


class DyadicTable(BaseModel):
    """Quantity sampled at T, 2T, 4T, ... with a monotone-decrease verdict."""
    quantity: str
    rows: List[DyadicRow] = Field(default_factory=list)
    exact: bool = False  # all values vanish to round-off
    monotone: bool = False

    @property
    def passed(self) -> bool:
        return self.exact or self.monotone

    def values(self) -> List[float]:
        return [row.value for row in self.rows]


class DecayFit(BaseModel):
    """Least-squares power law (optionally with a log-power) fitted to a series."""
    quantity: str
    t_start: float
    t_end: float
    exponent: Optional[float] = None
    log_power: Optional[float] = None
    residual: float = 0.0
    n_points: int = 0
    exact_zero: bool = False

    @classmethod
    def zero(cls, quantity: str, t_start: float, t_end: float, n_points: int) -> "DecayFit":
        """Series identically zero: decay faster than any power."""
        return cls(quantity=quantity, t_start=t_start, t_end=t_end, n_points=n_points, exact_zero=True)

    @property
    def decades(self) -> float:
        return math.log10(self.t_end / self.t_start) if self.t_start > 0 else 0.0


class ConservationSummary(BaseModel):
    """Audit of the invariants a run must preserve."""
    weight_drift: float = 0.0  # max relative change of per-species total weight
    continuity_residual: float = 0.0  # max over steps, relative to max|rho|
    div_b_max: float = 0.0
    div_e_residual_max: float = 0.0  # relative to max|rho| (absolute when rho == 0)
    beta_measured: float = 0.0
    steps: int = 0


class QuadratureParams(BaseModel):
    """Knobs of the retarded-shell quadrature."""
    radial_order: int = Field(default=8, ge=2)
    initial_panels: int = Field(default=4, ge=1)
    max_levels: int = Field(default=7, ge=1)
    polar_nodes: int = Field(default=16, ge=2)
    azimuth_nodes: int = Field(default=32, ge=3)
    rtol: float = Field(default=1e-8, gt=0)
    atol: float = Field(default=1e-15, ge=0)


class QuadratureResult(BaseModel):
    """Quadrature value with its error estimate."""
    value: float
    error: float
    converged: bool
    evaluations: int = 0


class GSReduction(BaseModel):
    """Both sides of the change-of-variables identity."""
    lhs: float
    rhs: float

    @property
    def diff(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def relative_diff(self) -> float:
        return self.diff / max(abs(self.lhs), 1e-300)


class LWaveRow(BaseModel):
    """Sample comparison of t^2 psi(t, x) with psi_inf(x/t) at one time."""
    t: float
    sup_err: float
    n_samples: int
    quadrature_err_max: float


class LWaveReport(BaseModel):
    """Self-similar wave limit check."""
    rows: List[LWaveRow] = Field(default_factory=list)
    doubling_ratios: List[float] = Field(default_factory=list)
    exact: bool = False
    passed: bool = False
    psi_inf_sup: float = 0.0


class PRateFit(BaseModel):
    """Decay of the dyadic momentum increments |P(2T) - P(T)|."""
    regime: Regime
    table: DyadicTable
    slope: Optional[float] = None
    exact: bool = False
    expected: str = ""
    passed: bool = False


class CheckResult(BaseModel):
    """Outcome of one verification check."""
    name: str
    passed: bool
    seconds: float = 0.0
    details: Dict[str, Any] = Field(default_factory=dict)
    message: str = ""


class ScatteringReport(BaseModel):
    """Final analysis report of a run."""
    regime: Regime
    tables: Dict[str, DyadicTable] = Field(default_factory=dict)
    fits: Dict[str, DecayFit] = Field(default_factory=dict)
    verdicts: Dict[str, bool] = Field(default_factory=dict)
    metrics: Dict[str, float] = Field(default_factory=dict)
    thresholds: Dict[str, Any] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())
