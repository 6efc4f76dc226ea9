"""Use case for simulating one run configuration."""
import os
from typing import Optional

from application.stage_result import StageResult, StageStatus
from domain.exceptions import ConfigValidationError, RvmError
from domain.models.run_config import RunConfig
from domain.models.run_record import RunRecord
from domain.physics.vlasov_pic import run_coupled
from domain.ports.artifact_store import ArtifactStore
from domain.ports.logger import AppLogger
from domain.ports.run_catalog import RunCatalog

DEFAULT_RUNS_DIR = "runs"


class RunSimulationUseCase:
    """Runs the coupled simulation and writes its artifacts."""

    def __init__(
        self,
        artifact_store: ArtifactStore,
        run_catalog: RunCatalog,
        logger: AppLogger,
        default_workers: int = 1,
        workers_override: Optional[int] = None,
    ):
        """
        Initializes the use case.

        Args:
            artifact_store: Writer of the run directory
            run_catalog: Catalog of run directories
            logger: Logger instance
            default_workers: Worker count when the configuration sets none
            workers_override: Worker count that wins over the configuration
        """
        self.artifact_store = artifact_store
        self.run_catalog = run_catalog
        self.logger = logger
        self.default_workers = default_workers
        self.workers_override = workers_override

    def run_dir(self, config: RunConfig) -> str:
        """Absolute output directory of a configuration."""
        return os.path.abspath(config.run.output_dir or os.path.join(DEFAULT_RUNS_DIR, config.run.name))

    def workers(self, config: RunConfig) -> int:
        if self.workers_override:
            return self.workers_override
        return config.run.workers or self.default_workers

    def execute(self, config: RunConfig, config_text: str, config_digest: str) -> StageResult:
        """
        Executes the simulation stage.

        Args:
            config: Validated run configuration
            config_text: Its serialized form, copied into the run directory
            config_digest: SHA-256 of config_text

        Returns:
            StageResult with the run directory as output
        """
        run_dir = self.run_dir(config)
        self.logger.title(f"Run '{config.run.name}'")
        self.logger.info(f"Output directory: {run_dir}")

        record = RunRecord(run_dir=run_dir, config_digest=config_digest, seed=config.run.seed)
        existing = self.run_catalog.find_by_run_dir(run_dir)
        if existing:
            self.logger.warning(f"Run directory {run_dir} is already catalogued as {existing.status.value}, overwriting")
            record = record.model_copy(update={"created_at": existing.created_at})
        record = self.run_catalog.save(record.mark_as_running())

        try:
            artifacts = run_coupled(config, self.logger, self.workers(config))
            self.artifact_store.save_run(run_dir, artifacts, config_text)
        except ConfigValidationError as e:
            self.logger.error(f"Invalid configuration: {e}")
            self.run_catalog.save(record.mark_as_failed(str(e)))
            return StageResult(stage="run", status=StageStatus.CONFIG_ERROR, output=run_dir, message=str(e))
        except RvmError as e:
            self.logger.error(f"Run failed: {e}")
            self.run_catalog.save(record.mark_as_failed(str(e)))
            return StageResult(stage="run", status=StageStatus.FAILED, output=run_dir, message=str(e))

        summary = artifacts.conservation
        self.logger.subtitle("Conservation summary")
        self.logger.info(f"steps={summary.steps} weight_drift={summary.weight_drift:.3e} "
                         f"continuity={summary.continuity_residual:.3e} divB={summary.div_b_max:.3e} "
                         f"divE={summary.div_e_residual_max:.3e} beta={summary.beta_measured:.6g}")
        self.run_catalog.save(record.mark_as_completed())
        self.logger.info(f"Run '{config.run.name}' completed")
        return StageResult(stage="run", output=run_dir, message="completed",
                           details={"conservation": summary.model_dump(), "census": artifacts.metadata.get("census", {})})
