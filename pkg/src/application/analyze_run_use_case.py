"""Use case for analyzing a completed run directory."""
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from application.stage_result import StageResult, StageStatus
from domain.constants.model import GridKind, MirrorMode
from domain.constants.regime import Regime
from domain.exceptions import ConfigValidationError, DomainViolationError, InsufficientDataError, RvmError
from domain.models.diagnostics import DiagnosticsSeries
from domain.models.field_grid import GridGeometry
from domain.models.initial_data import BumpProfile
from domain.models.momentum_grid import MomentumGrid, MomentumGridFunction
from domain.models.reports import DecayFit, DyadicTable
from domain.models.run_config import AnalysisSection, RunConfig
from domain.models.run_record import RunRecord, RunStatus
from domain.models.species import SpeciesSpec
from domain.models.trajectory import TracerRecord
from domain.physics.asymptotics import (
    dyadic_report,
    decay_fit,
    limit_derivatives,
    limit_F,
    limit_j,
    limit_rho,
    pushforward_density,
    rescaled_compare,
    rescaled_compare_gradient,
    rescaled_deviations,
)
from domain.physics.characteristics import limiting_momentum, scattering_label, support_growth_fit
from domain.physics.limitfields import RESIDUAL_TOLERANCE, LimitForce, limit_B, limit_E
from domain.physics.scattering import (
    assemble_report,
    classify_regime,
    dyadic_times,
    h_convergence,
    label_gap,
    p_infinity_rate,
)
from domain.ports.artifact_store import ArtifactStore, Series
from domain.ports.logger import AppLogger
from domain.ports.run_catalog import RunCatalog

# Conservation audit tolerances
WEIGHT_TOLERANCE = 1e-12
CONTINUITY_TOLERANCE = 1e-12
DIV_B_TOLERANCE = 1e-13
LIMIT_MASS_TOLERANCE = 1e-3
# Exponent windows of the decay fits
EXPONENT_TOLERANCE = 0.4
VANISHING_DENSITY_EXPONENT = -3.4
FREE_STREAMING_TOLERANCE = 0.05

# diagnostics column -> expected decay exponent
DECAY_COLUMNS = (("supE_cone", -2.0), ("supB_cone", -2.0), ("sup_rho", -3.0))
FIELD_COLUMNS = ("supE_cone", "supB_cone")


@dataclass
class _Analysis:
    """Accumulated outputs of one analysis pass."""
    tables: Dict[str, DyadicTable] = field(default_factory=dict)
    fits: Dict[str, DecayFit] = field(default_factory=dict)
    verdicts: Dict[str, bool] = field(default_factory=dict)
    metrics: Dict[str, float] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    series: Dict[str, Series] = field(default_factory=dict)
    functions: Dict[str, MomentumGridFunction] = field(default_factory=dict)


def _table_series(table: DyadicTable) -> Series:
    nan = float("nan")
    rows = [(r.t, r.value, nan if r.ratio is None else r.ratio, nan if r.scaled is None else r.scaled)
            for r in table.rows]
    return ("t", "value", "ratio", "scaled"), np.array(rows, dtype=float).reshape(-1, 4)


def _source_profile(config: RunConfig, index: int) -> BumpProfile:
    """Profile a species is sampled from, reflected for reflect-mode mirrors."""
    profile = config.source_section(index).profile()
    section = config.species[index]
    if section.mirror_of is not None and section.mirror_mode is MirrorMode.REFLECT:
        return profile.model_copy(update={
            "center_x": tuple(-c for c in profile.center_x),
            "center_p": tuple(-c for c in profile.center_p),
        })
    return profile


class AnalyzeRunUseCase:
    """Extracts the limiting profiles of a run and checks the decay and scattering statements."""

    def __init__(
        self,
        artifact_store: ArtifactStore,
        run_catalog: RunCatalog,
        logger: AppLogger,
        config_parser: Callable[[str], RunConfig],
        digest: Callable[[str], str],
    ):
        """
        Initializes the use case.

        Args:
            artifact_store: Reader and writer of run directories
            run_catalog: Catalog of run directories
            logger: Logger instance
            config_parser: Parses the configuration copy stored in a run directory
            digest: Digest of a configuration text, for runs missing from the catalog
        """
        self.artifact_store = artifact_store
        self.run_catalog = run_catalog
        self.logger = logger
        self.config_parser = config_parser
        self.digest = digest

    def execute(self, run_dir: str, thresholds: Optional[AnalysisSection] = None) -> StageResult:
        """
        Executes the analysis stage.

        Args:
            run_dir: Directory written by the run stage
            thresholds: Analysis section overriding the one stored with the run

        Returns:
            StageResult with the report path as output
        """
        run_dir = os.path.abspath(run_dir)
        self.logger.title(f"Analyze {run_dir}")

        missing = self.artifact_store.missing_files(run_dir)
        if missing:
            message = f"{run_dir} is missing {', '.join(missing)}; re-run the 'run' stage"
            self.logger.error(message)
            return StageResult(stage="analyze", status=StageStatus.FAILED, output=run_dir, message=message,
                               failures=missing)

        record = self.run_catalog.find_by_run_dir(run_dir)
        if record is not None and not record.is_analyzable:
            message = f"run is catalogued as {record.status.value}; only completed runs can be analyzed"
            self.logger.error(message)
            return StageResult(stage="analyze", status=StageStatus.FAILED, output=run_dir, message=message)

        try:
            config_text = self.artifact_store.load_config_text(run_dir)
            config = self.config_parser(config_text)
        except ConfigValidationError as e:
            self.logger.error(f"Stored configuration is invalid: {e}")
            return StageResult(stage="analyze", status=StageStatus.CONFIG_ERROR, output=run_dir, message=str(e))
        except RvmError as e:
            self.logger.error(f"Analysis failed: {e}")
            return StageResult(stage="analyze", status=StageStatus.FAILED, output=run_dir, message=str(e))

        if record is None:
            self.logger.warning(f"{run_dir} is not catalogued, registering it as completed")
            record = self.run_catalog.save(RunRecord(
                run_dir=run_dir, config_digest=self.digest(config_text), seed=config.run.seed,
                status=RunStatus.COMPLETED,
            ))

        analysis = thresholds or config.analysis
        try:
            report, result, tracers = self._analyze(run_dir, config, analysis)
            report_path = self.artifact_store.save_analysis(run_dir, report, result.series, result.functions, tracers)
        except RvmError as e:
            self.logger.error(f"Analysis failed: {e}")
            self.run_catalog.save(record.model_copy(update={"error_message": str(e)}))
            return StageResult(stage="analyze", status=StageStatus.FAILED, output=run_dir, message=str(e))

        self.run_catalog.save(record.mark_as_analyzed())
        failed = sorted(k for k, v in report["verdicts"].items() if not v)
        self.logger.info(f"Regime: {report['regime']}")
        if failed:
            self.logger.warning(f"Failed verdicts: {', '.join(failed)}")
        self.logger.info(f"Report written to {report_path}")
        message = f"regime {report['regime']}"
        if failed:
            message += f", {len(failed)} failed verdict(s)"
        return StageResult(stage="analyze", status=StageStatus.FAILED if failed else StageStatus.SUCCESS,
                           output=report_path, message=message,
                           details={"regime": report["regime"], "passed": report["passed"]}, failures=failed)

    # Pipeline

    def _analyze(self, run_dir: str, config: RunConfig,
                 analysis: AnalysisSection) -> Tuple[Dict[str, Any], _Analysis, List[TracerRecord]]:
        store = self.artifact_store
        metadata = store.load_metadata(run_dir)
        species = config.species_specs()
        if len(metadata.get("species", [])) != len(species):
            raise ConfigValidationError("[species]", "stored configuration does not match the run metadata")
        bounds = np.cumsum([int(s["particles"]) for s in metadata["species"]])

        def species_of(tracer_id: int) -> SpeciesSpec:
            return species[min(int(np.searchsorted(bounds, tracer_id, side="right")), len(species) - 1)]

        diagnostics = store.load_diagnostics(run_dir)
        momentum = store.load_momentum_snapshots(run_dir)
        density = store.load_density_snapshots(run_dir)
        tracers = store.load_tracers(run_dir, species_of)
        gamma = float(metadata["gamma"])
        geometry = GridGeometry(extent=float(metadata["extent"]), cells=int(metadata["cells"]))
        total_mass = float(sum(s["weight_total"] for s in metadata["species"]))
        result = _Analysis()

        self.logger.subtitle("Conservation audit")
        self._audit(metadata, result)

        self.logger.subtitle("Limiting profiles")
        f_inf = []
        times = [snapshot.time for snapshot in momentum]
        for s in range(len(species)):
            limit, table = limit_F([snapshot.functions[s] for snapshot in momentum], times, analysis.kernel_width)
            limit.species = s
            f_inf.append(limit)
            result.tables[f"F_cauchy_s{s}"] = table
            result.functions[f"F_inf_s{s}"] = limit
        grid = MomentumGrid.from_spacing(gamma, gamma / analysis.velocity_cells, kind=GridKind.VELOCITY, ghost=1)
        rho_inf = limit_rho(f_inf, species, grid)
        result.functions["rho_inf"] = rho_inf
        mass_inf = float(rho_inf.values.sum() * grid.cell_volume)
        result.metrics["rho_inf_integral"] = mass_inf
        result.metrics["rho_inf_sup"] = rho_inf.sup()
        result.verdicts["rho_inf_neutral"] = abs(mass_inf) <= LIMIT_MASS_TOLERANCE * total_mass
        self.logger.info(f"sup|rho_inf| = {rho_inf.sup():.4e}, integral = {mass_inf:.4e}")

        self._density_comparisons(config, species, f_inf, grid, geometry, density, rho_inf, result)
        field_fits = self._decay_fits(config, diagnostics, analysis, result)

        regime = classify_regime(rho_inf, field_fits, total_mass, gamma, analysis.vanish_tol,
                                 analysis.field_exponent_cut)
        self.logger.info(f"Regime classified as {regime.value}")
        self._exponent_verdicts(regime, config.model.coupling, result)

        self.logger.subtitle("Limiting fields")
        force = self._limit_force(rho_inf, grid, gamma, analysis, result)
        if regime is Regime.VANISHING:
            result.verdicts["limit_fields_vanish"] = force.sup() <= RESIDUAL_TOLERANCE * max(1.0, rho_inf.sup())

        self.logger.subtitle("Scattering")
        labeled = self._scattering(tracers, regime, force, analysis, result)
        self._decay_series(diagnostics, result)
        self._log_tables(result)

        report = assemble_report(regime, result.tables, result.fits, result.verdicts, result.metrics,
                                 analysis.model_dump(mode="json"), result.notes)
        payload = report.model_dump(mode="json")
        payload["passed"] = report.passed
        payload["run"] = {"name": config.run.name, "seed": config.run.seed, "gamma": gamma,
                          "coupling": config.model.coupling, "model": config.model.velocity.value}
        return payload, result, labeled

    def _audit(self, metadata: Dict[str, Any], result: _Analysis) -> None:
        conservation = metadata.get("conservation", {})
        coupled = bool(metadata.get("coupling", True))
        for key in ("weight_drift", "continuity_residual", "div_b_max", "div_e_residual_max", "beta_measured"):
            result.metrics[key] = float(conservation.get(key, 0.0))
        result.verdicts["weight_conserved"] = result.metrics["weight_drift"] <= WEIGHT_TOLERANCE
        result.verdicts["div_b_free"] = result.metrics["div_b_max"] <= DIV_B_TOLERANCE
        if coupled:
            result.verdicts["continuity"] = result.metrics["continuity_residual"] <= CONTINUITY_TOLERANCE
        self.logger.info(
            f"weight drift {result.metrics['weight_drift']:.3e}, continuity {result.metrics['continuity_residual']:.3e}, "
            f"divB {result.metrics['div_b_max']:.3e}"
        )

    def _density_comparisons(self, config: RunConfig, species: List[SpeciesSpec], f_inf: List[MomentumGridFunction],
                             grid: MomentumGrid, geometry: GridGeometry, density, rho_inf: MomentumGridFunction,
                             result: _Analysis) -> None:
        """t^3 n(t, x) against the number-density limits, and against the closed form without coupling."""
        rows = []
        for s, spec in enumerate(species):
            n_inf = limit_rho([f_inf[s]], [spec], grid, charges=[1.0])
            n_inf.species = s
            result.functions[f"n_inf_s{s}"] = n_inf
            references = [("rescaled", n_inf)]
            if not config.model.coupling:
                references.append(("pushforward", pushforward_density(_source_profile(config, s), spec, grid)))
            for name, reference in references:
                errors, times = [], []
                for snapshot in density:
                    try:
                        comparison = rescaled_compare(snapshot.number[s], geometry, reference, snapshot.time)
                    except InsufficientDataError as e:
                        result.notes.append(f"{name} s{s}: {e}")
                        continue
                    times.append(comparison.time)
                    errors.append(comparison.relative_error)
                    rows.append((comparison.time, s, 0 if name == "rescaled" else 1, comparison.sup_error,
                                 comparison.reference_sup, comparison.relative_error))
                if not errors:
                    continue
                result.tables[f"{name}_density_s{s}"] = dyadic_report(times, errors, f"{name}_density_s{s}")
                result.metrics[f"{name}_density_error_s{s}"] = errors[-1]
                if name == "pushforward":
                    result.verdicts[f"free_streaming_s{s}"] = errors[-1] <= FREE_STREAMING_TOLERANCE
        if density and rho_inf.sup() > 0:
            last = density[-1]
            try:
                gradient = limit_derivatives(rho_inf, limit_j(rho_inf)).grad_rho
                comparison = rescaled_compare_gradient(last.charge, geometry, gradient, last.time)
                result.metrics["rescaled_gradient_error"] = comparison.relative_error
            except InsufficientDataError as e:
                result.notes.append(f"gradient comparison: {e}")
        columns = ("time", "species", "reference", "sup_error", "reference_sup", "relative_error")
        result.series["rescaled_density"] = (columns, np.array(rows, dtype=float).reshape(-1, len(columns)))

    def _decay_fits(self, config: RunConfig, diagnostics: DiagnosticsSeries, analysis: AnalysisSection,
                    result: _Analysis) -> List[DecayFit]:
        times = diagnostics.times
        window = (config.dyadic_start, float(times.max()))
        checkpoints = config.checkpoints
        field_fits = []
        for column, expected in DECAY_COLUMNS:
            values = diagnostics.column(column)
            try:
                fit = decay_fit(times, values, column, window=window, min_decades=analysis.fit_decades)
            except (InsufficientDataError, DomainViolationError) as e:
                result.notes.append(f"{column}: {e}; falling back to the dyadic decrease check")
                table = rescaled_deviations(times, values, checkpoints, -expected, f"{column}_dyadic")
                result.tables[f"{column}_dyadic"] = table
                result.verdicts[f"{column}_decay"] = table.passed
                continue
            result.fits[column] = fit
            if column in FIELD_COLUMNS:
                field_fits.append(fit)
        return field_fits

    def _exponent_verdicts(self, regime: Regime, coupled: bool, result: _Analysis) -> None:
        for column, expected in DECAY_COLUMNS:
            fit = result.fits.get(column)
            if fit is None:
                continue
            if fit.exact_zero:
                # Test-particle runs never create fields
                if column in FIELD_COLUMNS and not coupled:
                    continue
                result.verdicts[f"{column}_exact_zero"] = regime is Regime.VANISHING
                continue
            result.metrics[f"{column}_exponent"] = fit.exponent
            if regime is Regime.VANISHING:
                bound = VANISHING_DENSITY_EXPONENT if column == "sup_rho" else expected
                result.verdicts[f"{column}_decay"] = fit.exponent <= bound
            else:
                result.verdicts[f"{column}_decay"] = abs(fit.exponent - expected) <= EXPONENT_TOLERANCE

    def _limit_force(self, rho_inf: MomentumGridFunction, grid: MomentumGrid, gamma: float,
                     analysis: AnalysisSection, result: _Analysis) -> LimitForce:
        if rho_inf.sup() == 0.0:
            self.logger.info("rho_inf vanishes identically, limiting fields are zero")
            force = LimitForce.zero(grid, gamma)
        else:
            j_inf = limit_j(rho_inf)
            result.functions["j_inf"] = j_inf
            E_inf = limit_E(rho_inf, j_inf, gamma, solver=analysis.solver)
            B_inf = limit_B(j_inf, gamma, solver=analysis.solver)
            force = LimitForce(E_inf, B_inf, gamma)
            result.metrics["E_inf_residual"] = float(E_inf.meta.get("residual", 0.0))
            result.metrics["B_inf_residual"] = float(B_inf.meta.get("residual", 0.0))
        result.functions["E_inf"] = force.E_inf
        result.functions["B_inf"] = force.B_inf
        result.metrics["E_inf_sup"] = force.E_inf.sup()
        result.metrics["B_inf_sup"] = force.B_inf.sup()
        self.logger.info(f"sup|E_inf| = {force.E_inf.sup():.4e}, sup|B_inf| = {force.B_inf.sup():.4e}")
        return force

    def _scattering(self, tracers: List[TracerRecord], regime: Regime, force: LimitForce,
                    analysis: AnalysisSection, result: _Analysis) -> List[TracerRecord]:
        if not tracers:
            result.notes.append("no tracers recorded, scattering statistics skipped")
            return []
        envelope = 2.0 if regime is Regime.VANISHING else 1.0
        p_inf, bounds = {}, []
        for record in tracers:
            limit = limiting_momentum(record, envelope)
            record.p_inf_estimate = limit.p_inf
            p_inf[record.tracer_id] = limit.p_inf
            bounds.append(limit.err_bound)
        result.metrics["p_inf_err_bound"] = max(bounds)

        def forces(spec: SpeciesSpec):
            return force.sampler(spec)

        labeled = []
        for record in tracers:
            label = np.full_like(record.X, np.nan)
            try:
                times, labels = scattering_label(record, forces(record.species), p_inf[record.tracer_id])
                label[record.times >= 1.0] = labels
            except (InsufficientDataError, DomainViolationError) as e:
                result.notes.append(f"tracer {record.tracer_id}: {e}")
            record.label = label
            labeled.append(record)

        chain = dyadic_times(tracers[0].times, start=1.0)
        try:
            corrected = h_convergence(tracers, forces, chain, p_inf, "label_corrected")
            uncorrected = h_convergence(tracers, None, chain, p_inf, "label_uncorrected")
            gap = label_gap(tracers, forces, p_inf)
        except (InsufficientDataError, DomainViolationError) as e:
            result.notes.append(f"label statistics: {e}")
        else:
            result.tables["label_corrected"] = corrected
            result.tables["label_uncorrected"] = uncorrected
            result.metrics["label_gap"] = gap
            if regime is Regime.VANISHING:
                result.verdicts["labels_converge"] = uncorrected.exact or uncorrected.monotone
            else:
                result.verdicts["labels_converge"] = corrected.exact or corrected.monotone
                final_excess = uncorrected.rows[-1].value - corrected.rows[-1].value
                result.metrics["label_excess"] = final_excess
                result.verdicts["log_correction_needed"] = final_excess >= 0.5 * gap
        try:
            rate = p_infinity_rate(tracers, regime, chain, analysis.p_rate_nonvanishing, analysis.p_rate_tol,
                                   analysis.p_rate_vanishing)
        except InsufficientDataError as e:
            result.notes.append(f"P_inf rate: {e}")
        else:
            result.tables["P_doubling"] = rate.table
            result.verdicts["p_inf_rate"] = rate.passed
            if rate.slope is not None:
                result.metrics["p_inf_slope"] = rate.slope
        try:
            _, slope, _ = support_growth_fit(tracers)
            result.metrics["support_log_slope"] = slope
        except InsufficientDataError as e:
            result.notes.append(f"support growth: {e}")
        return labeled

    def _log_tables(self, result: _Analysis) -> None:
        self.logger.subtitle("Dyadic tables")
        for name, table in sorted(result.tables.items()):
            if not table.rows:
                continue
            verdict = "exact" if table.exact else "monotone" if table.monotone else "not monotone"
            self.logger.info(f"{name}: {verdict}")
            self.logger.table(("t", "value", "ratio", "scaled"), [(r.t, r.value, r.ratio, r.scaled) for r in table.rows])

    def _decay_series(self, diagnostics: DiagnosticsSeries, result: _Analysis) -> None:
        """Plot-ready t^2 sup E, t^2 sup B and t^3 sup rho, plus every dyadic table."""
        t = diagnostics.times
        positive = t > 0
        t = t[positive]
        data = np.column_stack([
            t,
            t ** 2 * diagnostics.column("supE_cone")[positive],
            t ** 2 * diagnostics.column("supB_cone")[positive],
            t ** 3 * diagnostics.column("sup_rho")[positive],
        ])
        result.series["scaled_decay"] = (("time", "t2_supE_cone", "t2_supB_cone", "t3_sup_rho"), data)
        for name, table in result.tables.items():
            if table.rows:
                result.series[f"dyadic_{name}"] = _table_series(table)
