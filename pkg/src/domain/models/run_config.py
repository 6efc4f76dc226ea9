"""Run configuration domain model."""
import math
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from domain.constants.model import MirrorMode, PoissonSymbol, SolverMethod, VelocityModel
from domain.exceptions import CFLViolationError, ConfigValidationError
from domain.models.field_grid import GridGeometry
from domain.models.initial_data import BumpProfile, InitialDataSpec, SpeciesInitialData
from domain.models.momentum_grid import MomentumGrid
from domain.models.species import SpeciesSpec

Vector3 = Tuple[float, float, float]

# Smallest admissible 1 - gamma^2
ELLIPTICITY_MARGIN = 0.01
# Pad in cells when [domain].pad is not given
DEFAULT_PAD_CELLS = 2
# t_max / dyadic_start when [diagnostics].dyadic_start is not given (1.2 decades)
DEFAULT_DYADIC_RATIO = 16.0


def _parse_vector(value):
    if isinstance(value, str):
        parts = [part.strip() for part in value.split(",") if part.strip()]
        return tuple(float(part) for part in parts)
    return value


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class RunSection(_Section):
    """General run settings."""
    name: str = "run"
    seed: int = 12345
    workers: Optional[int] = Field(default=None, ge=1)  # None = detected cores
    output_dir: Optional[str] = None  # None = runs/<name>


class DomainSection(_Section):
    """Spatial grid."""
    cells: int = Field(default=64, ge=8)
    extent: Optional[float] = Field(default=None, gt=0)  # half-width; None = t_max + L + pad
    pad: Optional[float] = Field(default=None, gt=0)  # None = 2 dx


class SpeciesSection(_Section):
    """One species and its bump profile."""
    name: str = "species"
    mass: float = Field(default=1.0, gt=0)
    charge: float = 1.0
    support_x: float = Field(default=1.0, gt=0)  # bump radius in x
    support_p: float = Field(default=0.25, gt=0)  # bump radius in p
    center_x: Vector3 = (0.0, 0.0, 0.0)
    center_p: Vector3 = (0.0, 0.0, 0.0)
    amplitude: float = 1.0
    particles: int = Field(default=10000, ge=1)
    tracers: int = Field(default=0, ge=0)
    mirror_of: Optional[int] = Field(default=None, ge=0)
    mirror_mode: MirrorMode = MirrorMode.COPY

    @field_validator("center_x", "center_p", mode="before")
    @classmethod
    def parse_vector(cls, v):
        """Accepts comma-separated text for 3-vectors."""
        return _parse_vector(v)

    @field_validator("mirror_mode", mode="before")
    @classmethod
    def parse_mirror_mode(cls, v):
        return MirrorMode.from_str(v) if isinstance(v, str) else v

    def profile(self) -> BumpProfile:
        return BumpProfile(
            amplitude=self.amplitude,
            center_x=self.center_x,
            center_p=self.center_p,
            radius_x=self.support_x,
            radius_p=self.support_p,
        )


class TimeSection(_Section):
    """Time stepping."""
    dt: float = Field(default=0.1, gt=0)
    t_max: float = Field(default=8.0, gt=0)


class DiagnosticsSection(_Section):
    """Diagnostic cadence and momentum histograms."""
    interval: Optional[float] = Field(default=None, gt=0)  # None = dyadic_start / 8
    dyadic_start: Optional[float] = Field(default=None, gt=0)  # None = t_max / 16
    momentum_cells: int = Field(default=33, ge=3)
    momentum_half_width: Optional[float] = Field(default=None, gt=0)  # None = 1.25 beta_bound


class ModelSection(_Section):
    """Physical model switches."""
    velocity: VelocityModel = VelocityModel.RELATIVISTIC
    coupling: bool = True  # False = test particles, Maxwell sees no sources
    beta_bound: Optional[float] = Field(default=None, gt=0)  # None = 1.5 * max support_p
    poisson_symbol: PoissonSymbol = PoissonSymbol.DISCRETE
    b_seed: float = 0.0

    @field_validator("velocity", mode="before")
    @classmethod
    def parse_velocity(cls, v):
        return VelocityModel.from_str(v) if isinstance(v, str) else v

    @field_validator("poisson_symbol", mode="before")
    @classmethod
    def parse_symbol(cls, v):
        return PoissonSymbol.from_str(v) if isinstance(v, str) else v


class AnalysisSection(_Section):
    """Analysis knobs and acceptance thresholds."""
    kernel_width: float = Field(default=2.0, ge=0)  # in momentum cells
    velocity_cells: int = Field(default=24, ge=4)  # lattice nodes per gamma
    vanish_tol: float = Field(default=1e-3, gt=0)
    field_exponent_cut: float = -2.5
    p_rate_nonvanishing: float = -1.0
    p_rate_tol: float = Field(default=0.3, gt=0)
    p_rate_vanishing: float = -1.5
    fit_decades: float = Field(default=1.0, gt=0)
    solver: SolverMethod = SolverMethod.AUTO

    @field_validator("solver", mode="before")
    @classmethod
    def parse_solver(cls, v):
        return SolverMethod.from_str(v) if isinstance(v, str) else v


class RunConfig(_Section):
    """Complete description of one simulation run and its analysis."""
    run: RunSection = Field(default_factory=RunSection)
    domain: DomainSection = Field(default_factory=DomainSection)
    species: List[SpeciesSection] = Field(default_factory=list)
    time: TimeSection = Field(default_factory=TimeSection)
    diagnostics: DiagnosticsSection = Field(default_factory=DiagnosticsSection)
    model: ModelSection = Field(default_factory=ModelSection)
    analysis: AnalysisSection = Field(default_factory=AnalysisSection)

    # Derived quantities

    def source_section(self, index: int) -> SpeciesSection:
        """Section whose profile a (possibly mirrored) species uses."""
        section = self.species[index]
        seen = {index}
        while section.mirror_of is not None:
            if section.mirror_of in seen or section.mirror_of >= len(self.species):
                raise ConfigValidationError(f"[species.{index}].mirror_of", "mirror chain is invalid")
            seen.add(section.mirror_of)
            section = self.species[section.mirror_of]
        return section

    @property
    def support_x(self) -> float:
        """L_x: largest |center_x| + radius over all species."""
        return max(self.source_section(i).profile().support_x for i in range(len(self.species)))

    @property
    def support_p(self) -> float:
        return max(self.source_section(i).profile().support_p for i in range(len(self.species)))

    @property
    def beta_bound(self) -> float:
        if self.model.beta_bound is not None:
            return self.model.beta_bound
        return 1.5 * self.support_p

    @property
    def extent(self) -> float:
        if self.domain.extent is not None:
            return self.domain.extent
        reach = self.time.t_max + self.support_x
        if self.domain.pad is not None:
            return reach + self.domain.pad
        # extent = reach + DEFAULT_PAD_CELLS * 2 * extent / cells
        return reach / (1.0 - 2.0 * DEFAULT_PAD_CELLS / self.domain.cells)

    @property
    def geometry(self) -> GridGeometry:
        return GridGeometry(extent=self.extent, cells=self.domain.cells)

    @property
    def pad(self) -> float:
        if self.domain.pad is not None:
            return self.domain.pad
        return DEFAULT_PAD_CELLS * self.geometry.dx

    @property
    def dyadic_start(self) -> float:
        return self.diagnostics.dyadic_start or self.time.t_max / DEFAULT_DYADIC_RATIO

    @property
    def steps_per_dyadic_start(self) -> int:
        return max(1, int(math.ceil(self.dyadic_start / self.time.dt - 1e-9)))

    @property
    def effective_dt(self) -> float:
        """Time step snapped so that every dyadic checkpoint is hit exactly."""
        return self.dyadic_start / self.steps_per_dyadic_start

    @property
    def total_steps(self) -> int:
        return int(math.floor(self.time.t_max / self.effective_dt + 1e-9))

    @property
    def checkpoint_steps(self) -> List[int]:
        """Steps at dyadic_start * 2^k up to t_max."""
        steps = []
        step = self.steps_per_dyadic_start
        while step <= self.total_steps:
            steps.append(step)
            step *= 2
        return steps

    @property
    def checkpoints(self) -> List[float]:
        return [s * self.effective_dt for s in self.checkpoint_steps]

    @property
    def diagnostic_stride(self) -> int:
        interval = self.diagnostics.interval or self.dyadic_start / 8.0
        stride = max(1, int(round(interval / self.effective_dt)))
        # Strides that do not divide the first checkpoint would miss it
        while self.steps_per_dyadic_start % stride:
            stride -= 1
        return stride

    @property
    def momentum_grid(self) -> MomentumGrid:
        half_width = self.diagnostics.momentum_half_width or 1.25 * self.beta_bound
        return MomentumGrid.from_cells(half_width, self.diagnostics.momentum_cells)

    def species_specs(self) -> List[SpeciesSpec]:
        return [
            SpeciesSpec(
                name=section.name,
                mass=section.mass,
                charge=section.charge,
                model=self.model.velocity,
                support_x=self.source_section(i).profile().support_x,
                support_p=self.source_section(i).profile().support_p,
            )
            for i, section in enumerate(self.species)
        ]

    def initial_data(self) -> InitialDataSpec:
        specs = self.species_specs()
        entries = []
        for i, section in enumerate(self.species):
            source = self.source_section(i)
            entries.append(SpeciesInitialData(
                species=specs[i],
                profile=source.profile(),
                particles=source.particles if section.mirror_of is not None else section.particles,
                tracers=section.tracers,
                mirror_of=section.mirror_of,
                mirror_mode=section.mirror_mode,
            ))
        return InitialDataSpec(species=entries)

    # Validation

    def validate_physics(self) -> "RunConfig":
        """
        Checks the constraints that need more than one section.

        Returns:
            The configuration itself

        Raises:
            ConfigValidationError: With the key path of the first violated constraint
        """
        from domain.physics.kinematics import support_params

        if not self.species:
            raise ConfigValidationError("[species.0]", "at least one species is required")
        for i, section in enumerate(self.species):
            if section.mirror_of is not None and section.mirror_of >= i:
                raise ConfigValidationError(
                    f"[species.{i}].mirror_of", f"must reference an earlier species, got {section.mirror_of}"
                )
            if section.tracers > self.source_section(i).particles:
                raise ConfigValidationError(f"[species.{i}].tracers", "more tracers than particles")
            if self.model.velocity is VelocityModel.CLASSICAL:
                support_p = self.source_section(i).profile().support_p
                if support_p >= 1.0:
                    raise ConfigValidationError(
                        f"[species.{i}].support_p",
                        f"classical model requires |center_p| + support_p < 1, got {support_p:.6g}",
                    )

        geometry = self.geometry
        cfl = geometry.dx / math.sqrt(3.0)
        if self.time.dt > cfl * (1.0 + 1e-12):
            raise CFLViolationError(
                "[time].dt", f"{self.time.dt:.6g} exceeds the CFL bound dx/sqrt(3) = {cfl:.6g}"
            )

        required = self.time.t_max + self.support_x + self.pad
        if self.extent < required * (1.0 - 1e-12):
            raise ConfigValidationError(
                "[domain].extent",
                f"{self.extent:.6g} does not contain the light cone: needs t_max + L + pad = {required:.6g}",
            )

        data = self.initial_data()
        if not data.is_neutral:
            raise ConfigValidationError(
                "[species].charge",
                f"net charge {data.net_charge:.6g} violates global neutrality",
            )

        beta = self.beta_bound
        if beta < self.support_p:
            raise ConfigValidationError(
                "[model].beta_bound", f"{beta:.6g} is below the initial momentum support {self.support_p:.6g}"
            )
        for i, spec in enumerate(self.species_specs()):
            params = support_params(beta, spec.mass, spec.model)
            if params.ellipticity_margin <= ELLIPTICITY_MARGIN:
                raise ConfigValidationError(
                    "[model].beta_bound",
                    f"ellipticity margin 1 - gamma^2 = {params.ellipticity_margin:.4g} is not above {ELLIPTICITY_MARGIN}",
                )
            if not params.ordered:
                raise ConfigValidationError(
                    f"[species.{i}].mass",
                    f"velocity radius zeta = {params.zeta:.4g} is not below gamma = {params.gamma:.4g}",
                )

        if self.momentum_grid.half_width < beta:
            raise ConfigValidationError(
                "[diagnostics].momentum_half_width",
                f"{self.momentum_grid.half_width:.6g} is below beta_bound {beta:.6g}",
            )
        return self
